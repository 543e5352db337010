#include "sqz/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sqz/errors.hpp"

namespace sqz {

namespace {

RunRecord single_run(double trace_true, double det_true, const ExperimentConfig& config,
                     std::uint64_t seed, const MlOptions& ml) {
  SimulatedRun sim = simulate_run_detailed(trace_true, det_true, config, seed);
  if (config.dark_rate > 0.0) {
    for (ClickRecord& r : sim.records) {
      r = subtract_dark(r, config.dark_rate, config.duration);
    }
  }
  RunRecord run;
  run.seed = seed;
  run.eta_assumed = perturbed_eta(config, seed);
  run.true_transmittances = std::move(sim.true_transmittances);
  run.estimate = ml_estimate(sim.records, run.eta_assumed, ml);
  return run;
}

// Runs fn(i) for i in [0, n) on a small pool; each index writes only its own slot.
template <class Fn>
void parallel_for(int n, unsigned threads, Fn fn) {
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(n, 1)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      }
    });
  }
  pool.clear();
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace

EnsembleResult summarize(double trace_true, double det_true, double eta,
                         std::vector<RunRecord> runs) {
  if (runs.empty()) {
    throw DomainError("ensemble summary needs at least one run");
  }
  EnsembleResult result;
  result.trace_true = trace_true;
  result.det_true = det_true;
  result.eta = eta;
  result.n_runs = static_cast<int>(runs.size());

  double sq_det = 0.0;
  double sq_trace = 0.0;
  double sum_det = 0.0;
  double sum_trace = 0.0;
  int reliable = 0;
  for (const RunRecord& r : runs) {
    const double dd = r.estimate.det - det_true;
    const double dt = r.estimate.trace - trace_true;
    sq_det += dd * dd;
    sq_trace += dt * dt;
    sum_det += r.estimate.det;
    sum_trace += r.estimate.trace;
    reliable += r.estimate.det_reliable ? 1 : 0;
  }
  const double n = static_cast<double>(runs.size());
  result.sigma_det = std::sqrt(sq_det / n);
  result.sigma_trace = std::sqrt(sq_trace / n);
  result.mean_det_est = sum_det / n;
  result.mean_trace_est = sum_trace / n;
  result.fraction_det_reliable = reliable / n;
  result.runs = std::move(runs);
  return result;
}

EnsembleResult run_ensemble(double trace_true, double det_true, const ExperimentConfig& config,
                            int n_runs, std::uint64_t seed, const EnsembleOptions& options) {
  validate(config);
  if (n_runs < 1) {
    throw DomainError("ensemble needs n_runs >= 1");
  }
  if (!check_physicality(trace_true, det_true)) {
    throw UnphysicalError("ensemble state is unphysical");
  }
  std::vector<RunRecord> runs(static_cast<std::size_t>(n_runs));
  parallel_for(n_runs, options.threads, [&](int i) {
    runs[static_cast<std::size_t>(i)] = single_run(
        trace_true, det_true, config, run_seed(seed, static_cast<std::uint64_t>(i)), options.ml);
  });
  return summarize(trace_true, det_true, config.eta_apd, std::move(runs));
}

std::vector<EnsembleResult> eta_sweep(double trace_true, double det_true,
                                      const ExperimentConfig& base_config,
                                      std::span<const double> etas, int n_runs,
                                      bool with_uncertainties, std::uint64_t seed,
                                      const EnsembleOptions& options) {
  if (etas.empty()) {
    throw DomainError("eta sweep needs at least one efficiency");
  }
  std::vector<EnsembleResult> out;
  out.reserve(etas.size());
  for (std::size_t k = 0; k < etas.size(); ++k) {
    ExperimentConfig config = base_config;
    config.eta_apd = etas[k];
    if (!with_uncertainties) {
      config.t_uncertainty = 0.0;
      config.eta_rel_uncertainty = 0.0;
    }
    out.push_back(run_ensemble(trace_true, det_true, config, n_runs, derive_seed(seed, k),
                               options));
  }
  return out;
}

std::vector<EnsembleResult> state_sweep(std::span<const Invariants> states,
                                        const ExperimentConfig& config, int n_runs,
                                        std::uint64_t seed, const EnsembleOptions& options) {
  std::vector<EnsembleResult> out;
  out.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    out.push_back(run_ensemble(states[k].trace, states[k].det, config, n_runs,
                               derive_seed(seed, k), options));
  }
  return out;
}

}  // namespace sqz
