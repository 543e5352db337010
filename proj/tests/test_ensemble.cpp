#include <gtest/gtest.h>

#include <cmath>

#include "sqz/ensemble.hpp"
#include "sqz/errors.hpp"

namespace sqz {
namespace {

ExperimentConfig quick_config(double eta) {
  ExperimentConfig c;
  c.eta_apd = eta;
  return c;
}

TEST(Ensemble, SingleRunSigmaIsAbsoluteDeviation) {
  const auto r = run_ensemble(2.321, 1.156, quick_config(0.5), 1, 7);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_DOUBLE_EQ(r.sigma_det, std::abs(r.runs[0].estimate.det - 1.156));
  EXPECT_DOUBLE_EQ(r.sigma_trace, std::abs(r.runs[0].estimate.trace - 2.321));
  EXPECT_EQ(r.n_runs, 1);
}

TEST(Ensemble, IndependentOfThreadCount) {
  EnsembleOptions one;
  one.threads = 1;
  EnsembleOptions four;
  four.threads = 4;
  const auto a = run_ensemble(2.321, 1.156, quick_config(0.3), 8, 99, one);
  const auto b = run_ensemble(2.321, 1.156, quick_config(0.3), 8, 99, four);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].seed, b.runs[i].seed);
    EXPECT_EQ(a.runs[i].estimate.trace, b.runs[i].estimate.trace);
    EXPECT_EQ(a.runs[i].estimate.det, b.runs[i].estimate.det);
  }
  EXPECT_EQ(a.sigma_det, b.sigma_det);
}

TEST(Ensemble, SummaryRecomputesFromRuns) {
  ExperimentConfig c = quick_config(0.5);
  c.t_uncertainty = 0.005;
  c.eta_rel_uncertainty = 0.01;
  const auto r = run_ensemble(2.321, 1.156, c, 10, 3);
  double sq = 0.0;
  for (const auto& run : r.runs) {
    sq += std::pow(run.estimate.det - 1.156, 2);
    EXPECT_EQ(run.true_transmittances.size(), c.transmittances.size());
  }
  EXPECT_NEAR(r.sigma_det, std::sqrt(sq / 10.0), 1e-15);
  const auto again = summarize(2.321, 1.156, 0.5, r.runs);
  EXPECT_EQ(again.sigma_det, r.sigma_det);
  EXPECT_EQ(again.mean_trace_est, r.mean_trace_est);
}

TEST(Ensemble, VacuumHasZeroSpread) {
  const auto r = run_ensemble(2.0, 1.0, quick_config(0.5), 5, 1);
  EXPECT_EQ(r.sigma_det, 0.0);
  EXPECT_EQ(r.sigma_trace, 0.0);
  EXPECT_EQ(r.fraction_det_reliable, 1.0);
}

TEST(Ensemble, ThermalBoundaryStateRuns) {
  const auto r = run_ensemble(2.6, 1.69, quick_config(0.5), 5, 2);
  for (const auto& run : r.runs) {
    EXPECT_TRUE(check_physicality(run.estimate.trace, run.estimate.det));
  }
}

TEST(Ensemble, HighEfficiencyIsPrecise) {
  const auto r = run_ensemble(2.321, 1.156, quick_config(1.0), 10, 5);
  EXPECT_LT(r.sigma_det, 2e-3);
  EXPECT_LT(r.sigma_trace, 2e-3);
}

TEST(Ensemble, Errors) {
  EXPECT_THROW((void)run_ensemble(2.321, 1.156, quick_config(0.5), 0, 1), DomainError);
  EXPECT_THROW((void)run_ensemble(2.321, 0.9, quick_config(0.5), 2, 1), UnphysicalError);
  EXPECT_THROW((void)summarize(2.0, 1.0, 0.5, {}), DomainError);
}

TEST(EtaSweep, SpreadShrinksWithEfficiency) {
  const std::vector<double> etas{0.05, 0.1, 0.2, 0.4, 0.8};
  const auto res = eta_sweep(2.321, 1.156, ExperimentConfig{}, etas, 40, false, 11);
  ASSERT_EQ(res.size(), etas.size());
  std::vector<double> s;
  for (const auto& r : res) s.push_back(r.sigma_det);
  // Three-point moving average must decrease.
  for (std::size_t i = 2; i + 1 < s.size(); ++i) {
    EXPECT_LT(s[i - 1] + s[i] + s[i + 1], s[i - 2] + s[i - 1] + s[i]);
  }
  EXPECT_LT(s.back(), s.front());
}

TEST(StateSweep, OneResultPerState) {
  const std::vector<Invariants> states{{2.321, 1.156}, {2.5, 1.2}};
  const auto res = state_sweep(states, quick_config(0.5), 4, 13);
  ASSERT_EQ(res.size(), 2u);
  EXPECT_EQ(res[1].trace_true, 2.5);
  EXPECT_NE(res[0].runs[0].seed, res[1].runs[0].seed);
}

}  // namespace
}  // namespace sqz
