#pragma once

// Monte Carlo model of the pulsed photon-counting experiment: a tunable
// beamsplitter followed by an on/off detector of overall efficiency eta.

#include <cstdint>
#include <vector>

#include "sqz/gaussian.hpp"

namespace sqz {

struct ExperimentConfig {
  double rep_rate = 780.4e3;  // pulses per second
  double duration = 100.0;    // seconds per transmittance setting
  std::vector<double> transmittances{1.0, 0.75, 0.5, 0.25};
  double eta_apd = 0.84e-2;
  double dark_rate = 0.0;            // counts per second
  double t_uncertainty = 0.0;        // absolute std-dev of the true T around nominal
  double eta_rel_uncertainty = 0.0;  // relative std-dev of the reported eta

  // Pulses per setting, rep_rate * duration rounded to the nearest integer.
  [[nodiscard]] std::int64_t trials() const;
};

// Throws DomainError on an invalid config.
void validate(const ExperimentConfig& config);

struct ClickRecord {
  double t_nominal = 1.0;
  std::int64_t trials = 0;
  std::int64_t clicks = 0;
  bool dark_subtracted = false;

  friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

struct SimulatedRun {
  std::vector<ClickRecord> records;
  std::vector<double> true_transmittances;  // one draw per setting
};

// Above this binomial variance clicks are drawn from the matching normal.
inline constexpr double kNormalApproxVariance = 100.0;

// Draws from Binomial(trials, q), switching to the normal approximation
// (rounded, clamped to [0, trials]) when trials q (1 - q) exceeds
// kNormalApproxVariance.
template <class Rng>
std::int64_t sample_clicks(std::int64_t trials, double q, Rng& rng);

[[nodiscard]] SimulatedRun simulate_run_detailed(double trace, double det,
                                                 const ExperimentConfig& config,
                                                 std::uint64_t seed);

[[nodiscard]] std::vector<ClickRecord> simulate_run(double trace, double det,
                                                    const ExperimentConfig& config,
                                                    std::uint64_t seed);

// Low-efficiency click rate per second at T = 1:
//   (1/2) eta rep_rate [(h - 1/2)(g + 1/g) - 1].
[[nodiscard]] double expected_click_rate(const SqueezerParams& params, double eta,
                                         double rep_rate);

// Exact counterpart of expected_click_rate: rep_rate (1 - P) at T = 1.
[[nodiscard]] double exact_click_rate(const SqueezerParams& params, double eta,
                                      double rep_rate);

// Removes the expected dark counts, floored at zero. Throws DomainError if
// the record was already dark-subtracted.
[[nodiscard]] ClickRecord subtract_dark(const ClickRecord& record, double dark_rate,
                                        double duration);

// Efficiency value handed to the estimator: eta_apd (1 + N(0, rel)), clipped
// to (0, 1].
[[nodiscard]] double perturbed_eta(const ExperimentConfig& config, std::uint64_t seed);

// SplitMix64 finaliser; used to derive independent stream seeds.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of sub-stream `index` under `master`.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(master ^ mix_seed(index));
}

}  // namespace sqz

#include "sqz/detail/sample_clicks.ipp"
