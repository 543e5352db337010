#pragma once

// Repeated simulate -> estimate cycles and RMS deviation statistics.

#include <cstdint>
#include <span>
#include <vector>

#include "sqz/estimators.hpp"
#include "sqz/forward_sim.hpp"

namespace sqz {

inline constexpr int kDefaultRuns = 200;
inline constexpr int kFullScaleRuns = 1000;

// Per-run artefacts kept for post-hoc statistics.
struct RunRecord {
  std::uint64_t seed = 0;
  double eta_assumed = 0.0;
  std::vector<double> true_transmittances;
  Estimate estimate;
};

struct EnsembleResult {
  double trace_true = 2.0;
  double det_true = 1.0;
  double eta = 0.0;
  // Root mean square deviation from the TRUE value (not about the mean).
  double sigma_det = 0.0;
  double sigma_trace = 0.0;
  double mean_det_est = 0.0;
  double mean_trace_est = 0.0;
  int n_runs = 0;
  double fraction_det_reliable = 0.0;
  std::vector<RunRecord> runs;
};

struct EnsembleOptions {
  MlOptions ml;
  // 0 uses std::thread::hardware_concurrency().
  unsigned threads = 0;
};

// Seed of run i under a master seed; results never depend on thread count.
[[nodiscard]] constexpr std::uint64_t run_seed(std::uint64_t master, std::uint64_t run_index) {
  return derive_seed(master, run_index);
}

// Recomputes the summary statistics from stored runs.
[[nodiscard]] EnsembleResult summarize(double trace_true, double det_true, double eta,
                                       std::vector<RunRecord> runs);

[[nodiscard]] EnsembleResult run_ensemble(double trace_true, double det_true,
                                          const ExperimentConfig& config, int n_runs,
                                          std::uint64_t seed,
                                          const EnsembleOptions& options = {});

// One ensemble per efficiency. Without uncertainties T and eta are known
// exactly; with them, the base config's uncertainty fields apply.
[[nodiscard]] std::vector<EnsembleResult> eta_sweep(double trace_true, double det_true,
                                                    const ExperimentConfig& base_config,
                                                    std::span<const double> etas, int n_runs,
                                                    bool with_uncertainties, std::uint64_t seed,
                                                    const EnsembleOptions& options = {});

[[nodiscard]] std::vector<EnsembleResult> state_sweep(std::span<const Invariants> states,
                                                      const ExperimentConfig& config, int n_runs,
                                                      std::uint64_t seed,
                                                      const EnsembleOptions& options = {});

}  // namespace sqz
