#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "sqz/ensemble.hpp"
#include "sqz/errors.hpp"
#include "sqz/estimators.hpp"
#include "sqz/forward_sim.hpp"
#include "sqz/gaussian.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Photon-counting characterisation of single-mode squeezed vacuum";

  py::register_exception<sqz::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<sqz::UnphysicalError>(m, "UnphysicalError", PyExc_ValueError);
  py::register_exception<sqz::EstimationError>(m, "EstimationError", PyExc_RuntimeError);

  py::class_<sqz::CovarianceMatrix>(m, "CovarianceMatrix")
      .def(py::init<double, double, double>(), "vxx"_a = 1.0, "vpp"_a = 1.0, "vxp"_a = 0.0)
      .def_readwrite("vxx", &sqz::CovarianceMatrix::vxx)
      .def_readwrite("vpp", &sqz::CovarianceMatrix::vpp)
      .def_readwrite("vxp", &sqz::CovarianceMatrix::vxp)
      .def_property_readonly("trace", &sqz::CovarianceMatrix::trace)
      .def_property_readonly("det", &sqz::CovarianceMatrix::det)
      .def("is_physical", &sqz::CovarianceMatrix::is_physical)
      .def("__repr__", [](const sqz::CovarianceMatrix& c) {
        return "CovarianceMatrix(vxx=" + std::to_string(c.vxx) + ", vpp=" +
               std::to_string(c.vpp) + ", vxp=" + std::to_string(c.vxp) + ")";
      });

  py::class_<sqz::SqueezerParams>(m, "SqueezerParams")
      .def(py::init<double, double>(), "g"_a = 1.0, "h"_a = 1.0)
      .def_readwrite("g", &sqz::SqueezerParams::g)
      .def_readwrite("h", &sqz::SqueezerParams::h);

  py::class_<sqz::QuadratureVariances>(m, "QuadratureVariances")
      .def_readonly("vmin", &sqz::QuadratureVariances::vmin)
      .def_readonly("vmax", &sqz::QuadratureVariances::vmax);

  py::class_<sqz::GainBounds>(m, "GainBounds")
      .def_readonly("g_max", &sqz::GainBounds::g_max)
      .def_readonly("h_max", &sqz::GainBounds::h_max);

  py::class_<sqz::Invariants>(m, "Invariants")
      .def(py::init<double, double>(), "trace"_a = 2.0, "det"_a = 1.0)
      .def_readwrite("trace", &sqz::Invariants::trace)
      .def_readwrite("det", &sqz::Invariants::det);

  m.def("cov_from_squeezer", &sqz::cov_from_squeezer, "params"_a);
  m.def("squeezer_from_invariants", &sqz::squeezer_from_invariants, "trace"_a, "det"_a);
  m.def("variances_from_invariants", &sqz::variances_from_invariants, "trace"_a, "det"_a);
  m.def("purity", &sqz::purity, "cov"_a);
  m.def("purity_from_h", &sqz::purity_from_h, "h"_a);
  m.def("apply_beamsplitter", &sqz::apply_beamsplitter, "cov"_a, "t"_a);
  m.def("q_function", &sqz::q_function, "cov"_a, "x"_a, "p"_a);
  m.def("no_click_probability", &sqz::no_click_probability, "cov"_a);
  m.def("no_click_from_invariants", &sqz::no_click_from_invariants, "trace"_a, "det"_a,
        "eff_t"_a);
  m.def("gain_bounds_from_trace", &sqz::gain_bounds_from_trace, "trace"_a);
  m.def("check_physicality", &sqz::check_physicality, "trace"_a, "det"_a);

  py::class_<sqz::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("rep_rate", &sqz::ExperimentConfig::rep_rate)
      .def_readwrite("duration", &sqz::ExperimentConfig::duration)
      .def_readwrite("transmittances", &sqz::ExperimentConfig::transmittances)
      .def_readwrite("eta_apd", &sqz::ExperimentConfig::eta_apd)
      .def_readwrite("dark_rate", &sqz::ExperimentConfig::dark_rate)
      .def_readwrite("t_uncertainty", &sqz::ExperimentConfig::t_uncertainty)
      .def_readwrite("eta_rel_uncertainty", &sqz::ExperimentConfig::eta_rel_uncertainty)
      .def_property_readonly("trials", &sqz::ExperimentConfig::trials);

  py::class_<sqz::ClickRecord>(m, "ClickRecord")
      .def(py::init<double, std::int64_t, std::int64_t, bool>(), "t_nominal"_a, "trials"_a,
           "clicks"_a, "dark_subtracted"_a = false)
      .def_readwrite("t_nominal", &sqz::ClickRecord::t_nominal)
      .def_readwrite("trials", &sqz::ClickRecord::trials)
      .def_readwrite("clicks", &sqz::ClickRecord::clicks)
      .def_readwrite("dark_subtracted", &sqz::ClickRecord::dark_subtracted)
      .def(py::self == py::self);

  m.def("simulate_run", &sqz::simulate_run, "trace"_a, "det"_a, "config"_a, "seed"_a);
  m.def("expected_click_rate", &sqz::expected_click_rate, "params"_a, "eta"_a, "rep_rate"_a);
  m.def("subtract_dark", &sqz::subtract_dark, "record"_a, "dark_rate"_a, "duration"_a);
  m.def("perturbed_eta", &sqz::perturbed_eta, "config"_a, "seed"_a);

  py::class_<sqz::Estimate>(m, "Estimate")
      .def_readonly("trace", &sqz::Estimate::trace)
      .def_readonly("det", &sqz::Estimate::det)
      .def_readonly("det_reliable", &sqz::Estimate::det_reliable)
      .def_readonly("log_likelihood_at_max", &sqz::Estimate::log_likelihood_at_max)
      .def_property_readonly("vmin", [](const sqz::Estimate& e) { return e.derived.value().variances.vmin; })
      .def_property_readonly("vmax", [](const sqz::Estimate& e) { return e.derived.value().variances.vmax; })
      .def_property_readonly("purity", [](const sqz::Estimate& e) { return e.derived.value().purity; });

  m.def("invert_two_point", &sqz::invert_two_point, "t1"_a, "p1"_a, "t2"_a, "p2"_a);
  m.def(
      "sensitivity",
      [](double p1, double eta) {
        const auto s = sqz::sensitivity(p1, eta);
        return py::make_tuple(s.d_trace_dp1, s.d_det_dp1);
      },
      "p1"_a, "eta"_a);
  m.def(
      "log_likelihood",
      [](double trace, double det, const std::vector<sqz::ClickRecord>& data, double eta) {
        return sqz::log_likelihood(trace, det, data, eta);
      },
      "trace"_a, "det"_a, "data"_a, "eta_assumed"_a);
  m.def(
      "ml_estimate",
      [](const std::vector<sqz::ClickRecord>& data, double eta) {
        py::gil_scoped_release release;
        return sqz::ml_estimate(data, eta);
      },
      "data"_a, "eta_assumed"_a);
  m.def("classical_estimate", &sqz::classical_estimate, "gain_min"_a, "gain_max"_a);
  m.def("homodyne_correct", &sqz::homodyne_correct, "v_hom_min"_a, "v_hom_max"_a, "eta_hom"_a);
  m.def(
      "estimate_eta",
      [](const std::vector<std::pair<double, sqz::SqueezerParams>>& points, double rep_rate) {
        std::vector<sqz::ClickRatePoint> pts;
        for (const auto& [rate, params] : points) {
          pts.push_back({rate, params});
        }
        return sqz::estimate_eta(pts, rep_rate);
      },
      "click_rates"_a, "rep_rate"_a);
  m.def(
      "mode_count_fit",
      [](const std::vector<std::pair<double, double>>& samples, int max_modes) {
        std::vector<sqz::NoClickSample> s;
        for (const auto& [eff_t, p] : samples) {
          s.push_back({eff_t, p, 0});
        }
        return sqz::mode_count_fit(s, max_modes);
      },
      "samples"_a, "max_modes"_a);

  py::class_<sqz::EnsembleResult>(m, "EnsembleResult")
      .def_readonly("eta", &sqz::EnsembleResult::eta)
      .def_readonly("sigma_det", &sqz::EnsembleResult::sigma_det)
      .def_readonly("sigma_trace", &sqz::EnsembleResult::sigma_trace)
      .def_readonly("mean_det_est", &sqz::EnsembleResult::mean_det_est)
      .def_readonly("mean_trace_est", &sqz::EnsembleResult::mean_trace_est)
      .def_readonly("n_runs", &sqz::EnsembleResult::n_runs)
      .def_readonly("fraction_det_reliable", &sqz::EnsembleResult::fraction_det_reliable);

  m.def(
      "run_ensemble",
      [](double trace, double det, const sqz::ExperimentConfig& config, int n_runs,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return sqz::run_ensemble(trace, det, config, n_runs, seed);
      },
      "trace_true"_a, "det_true"_a, "config"_a, "n_runs"_a, "seed"_a);
  m.def(
      "eta_sweep",
      [](double trace, double det, const sqz::ExperimentConfig& config,
         const std::vector<double>& etas, int n_runs, bool with_uncertainties,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return sqz::eta_sweep(trace, det, config, etas, n_runs, with_uncertainties, seed);
      },
      "trace_true"_a, "det_true"_a, "base_config"_a, "etas"_a, "n_runs"_a,
      "with_uncertainties"_a, "seed"_a);
}
