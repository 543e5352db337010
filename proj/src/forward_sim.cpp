#include "sqz/forward_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sqz/errors.hpp"

namespace sqz {

namespace {

// Sub-stream tags so that T draws, click draws and eta draws never share
// a generator for the same run seed.
constexpr std::uint64_t kStreamClicks = 1;
constexpr std::uint64_t kStreamEta = 2;

}  // namespace

std::int64_t ExperimentConfig::trials() const {
  return static_cast<std::int64_t>(std::llround(rep_rate * duration));
}

void validate(const ExperimentConfig& config) {
  std::ostringstream msg;
  if (!(config.rep_rate > 0.0) || !(config.duration > 0.0)) {
    msg << "rep_rate and duration must be positive";
  } else if (config.transmittances.empty()) {
    msg << "at least one transmittance is required";
  } else if (std::any_of(config.transmittances.begin(), config.transmittances.end(),
                         [](double t) { return !(t >= 0.0 && t <= 1.0); })) {
    msg << "transmittances must lie in [0, 1]";
  } else if (!(config.eta_apd >= 0.0 && config.eta_apd <= 1.0)) {
    msg << "eta_apd must lie in [0, 1], got " << config.eta_apd;
  } else if (!(config.dark_rate >= 0.0) || !(config.t_uncertainty >= 0.0) ||
             !(config.eta_rel_uncertainty >= 0.0)) {
    msg << "dark_rate and uncertainties must be non-negative";
  } else if (config.trials() < 1) {
    msg << "rep_rate * duration must round to at least one pulse";
  } else {
    return;
  }
  throw DomainError("invalid experiment config: " + msg.str());
}

SimulatedRun simulate_run_detailed(double trace, double det, const ExperimentConfig& config,
                                   std::uint64_t seed) {
  validate(config);
  if (!check_physicality(trace, det)) {
    std::ostringstream msg;
    msg << "cannot simulate unphysical state (trace=" << trace << ", det=" << det << ")";
    throw UnphysicalError(msg.str());
  }

  std::mt19937_64 t_rng(seed);
  std::mt19937_64 click_rng(derive_seed(seed, kStreamClicks));
  std::normal_distribution<double> t_noise(0.0, 1.0);

  const std::int64_t trials = config.trials();
  SimulatedRun run;
  run.records.reserve(config.transmittances.size());
  run.true_transmittances.reserve(config.transmittances.size());

  for (const double t_nominal : config.transmittances) {
    double t_true = t_nominal;
    if (config.t_uncertainty > 0.0) {
      t_true = std::clamp(t_nominal + config.t_uncertainty * t_noise(t_rng), 0.0, 1.0);
    }
    const double q = click_from_invariants(trace, det, config.eta_apd * t_true);
    std::int64_t clicks = sample_clicks(trials, q, click_rng);
    if (config.dark_rate > 0.0) {
      std::poisson_distribution<std::int64_t> dark(config.dark_rate * config.duration);
      clicks = std::min(trials, clicks + dark(click_rng));
    }
    run.records.push_back({t_nominal, trials, clicks, false});
    run.true_transmittances.push_back(t_true);
  }
  return run;
}

std::vector<ClickRecord> simulate_run(double trace, double det, const ExperimentConfig& config,
                                      std::uint64_t seed) {
  return simulate_run_detailed(trace, det, config, seed).records;
}

double expected_click_rate(const SqueezerParams& params, double eta, double rep_rate) {
  validate(params);
  const double bracket = (params.h - 0.5) * (params.g + 1.0 / params.g) - 1.0;
  return 0.5 * eta * rep_rate * bracket;
}

double exact_click_rate(const SqueezerParams& params, double eta, double rep_rate) {
  const CovarianceMatrix cov = cov_from_squeezer(params);
  return rep_rate * click_from_invariants(cov.trace(), cov.det(), eta);
}

ClickRecord subtract_dark(const ClickRecord& record, double dark_rate, double duration) {
  if (record.dark_subtracted) {
    throw DomainError("dark counts were already subtracted from this record");
  }
  if (!(dark_rate >= 0.0) || !(duration >= 0.0)) {
    throw DomainError("dark rate and duration must be non-negative");
  }
  const auto expected = static_cast<std::int64_t>(std::llround(dark_rate * duration));
  ClickRecord out = record;
  out.clicks = std::max<std::int64_t>(0, record.clicks - expected);
  out.dark_subtracted = true;
  return out;
}

double perturbed_eta(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.eta_rel_uncertainty <= 0.0) {
    return config.eta_apd;
  }
  std::mt19937_64 rng(derive_seed(seed, kStreamEta));
  std::normal_distribution<double> noise(0.0, config.eta_rel_uncertainty);
  const double eta = config.eta_apd * (1.0 + noise(rng));
  // Smallest positive value keeps the estimator's precondition eta > 0.
  return std::clamp(eta, std::numeric_limits<double>::min(), 1.0);
}

}  // namespace sqz
