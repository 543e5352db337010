#pragma once

// Inference of (Tr gamma, det gamma) and related quantities from click data,
// plus the classical-gain and homodyne reference estimators.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sqz/forward_sim.hpp"
#include "sqz/gaussian.hpp"

namespace sqz {

struct Invariants {
  double trace = 2.0;
  double det = 1.0;
};

struct DerivedQuantities {
  QuadratureVariances variances;
  double purity = 1.0;
  GainBounds gain_bounds;
};

struct Estimate {
  double trace = 2.0;
  double det = 1.0;
  bool det_reliable = true;
  std::optional<DerivedQuantities> derived;
  double log_likelihood_at_max = 0.0;
};

// Fills in variances, purity and gain bounds for a physical (trace, det).
[[nodiscard]] DerivedQuantities derive_quantities(double trace, double det);

// Closed-form solution of the 2x2 linear system 4/P_j^2 = t_j^2 det +
// t_j (2 - t_j) trace + (2 - t_j)^2 for two effective transmittances.
// No physicality clamping. Throws DomainError when |t1 - t2| < 1e-6 or an
// argument leaves (0, 1].
[[nodiscard]] Invariants invert_two_point(double t1, double p1, double t2, double p2);

struct Sensitivity {
  double d_trace_dp1 = 0.0;
  double d_det_dp1 = 0.0;
};

// Low-efficiency sensitivities of the inversion to the first no-click
// probability: (4 / (eta p1^3), -16 / (eta^2 p1^3)).
[[nodiscard]] Sensitivity sensitivity(double p1, double eta);

// Binomial log-likelihood summed over settings. Returns -infinity when a
// record is impossible under (trace, det) (clicks on a certain no-click).
// Throws UnphysicalError for unphysical (trace, det).
[[nodiscard]] double log_likelihood(double trace, double det,
                                    std::span<const ClickRecord> data, double eta_assumed);

inline constexpr double kExcludedLogLikelihood = -std::numeric_limits<double>::infinity();

struct LikelihoodGrid {
  std::vector<double> trace_axis;
  std::vector<double> det_axis;
  // Row-major, trace index outer. Points outside 1 <= det <= (trace/2)^2
  // are marked excluded and hold kExcludedLogLikelihood.
  std::vector<double> log_l;
  std::vector<std::uint8_t> excluded;

  [[nodiscard]] double at(std::size_t i_trace, std::size_t i_det) const {
    return log_l[i_trace * det_axis.size() + i_det];
  }
  [[nodiscard]] bool is_excluded(std::size_t i_trace, std::size_t i_det) const {
    return excluded[i_trace * det_axis.size() + i_det] != 0;
  }
};

[[nodiscard]] LikelihoodGrid evaluate_likelihood_grid(std::span<const ClickRecord> data,
                                                      double eta_assumed,
                                                      std::vector<double> trace_axis,
                                                      std::vector<double> det_axis);

struct MlOptions {
  std::size_t points_per_axis = 200;
  double refinement = 10.0;         // spacing ratio between stages
  double final_resolution = 1e-4;   // on both axes
  std::size_t min_stages = 3;
  // det is flagged unreliable when the profile log-likelihood varies by less
  // than this across 1 <= det <= (trace/2)^2: half the 95% quantile of
  // chi^2 with one degree of freedom, i.e. no part of the interval can be
  // rejected by a likelihood-ratio test.
  double flatness_threshold = 1.9207;  // nats
  std::size_t flatness_samples = 41;
};

// Profile log-likelihood: max over admissible trace of log L at fixed det.
[[nodiscard]] double profile_log_likelihood(double det, std::span<const ClickRecord> data,
                                            double eta_assumed, const MlOptions& options = {});

// Constrained maximum-likelihood estimate by coarse-to-fine grid search over
// the physical region. det_reliable is false when the profile likelihood is
// flat in det (see MlOptions::flatness_threshold); all-zero data give the
// vacuum (2, 1) with det_reliable = true. On exact log-likelihood ties the smaller det wins,
// then the smaller trace. Throws EstimationError when fewer than two distinct
// non-zero effective transmittances are present.
[[nodiscard]] Estimate ml_estimate(std::span<const ClickRecord> data, double eta_assumed,
                                   const MlOptions& options = {});

// G = sqrt(G_max / G_min), H = sqrt(G_max G_min) from the classical probe gains.
[[nodiscard]] SqueezerParams classical_estimate(double gain_min, double gain_max);

// Undo homodyne losses: V = (V_hom - 1 + eta_hom) / eta_hom.
[[nodiscard]] QuadratureVariances homodyne_correct(double v_hom_min, double v_hom_max,
                                                   double eta_hom);

struct ClickRatePoint {
  double rate = 0.0;  // clicks per second at T = 1
  SqueezerParams params;
};

// Least-squares scale factor eta of the low-efficiency click-rate model.
[[nodiscard]] double estimate_eta(std::span<const ClickRatePoint> points, double rep_rate);

struct NoClickSample {
  double eff_t = 0.0;
  double p = 1.0;
  std::int64_t trials = 0;  // 0 marks an exact (noise-free) probability
};

struct ModeFitReport {
  // chi2_per_dof[n] for the polynomial of degree 2n; entry 0 is the constant model.
  std::vector<double> chi2_per_dof;
  std::vector<double> max_abs_residual;
  std::optional<int> modes;  // smallest passing n; nullopt if none passes
  [[nodiscard]] bool no_signal() const { return modes && *modes == 0; }
};

inline constexpr double kModeFitChi2Threshold = 2.0;

// Fits P^-2 - 1 by polynomials in eff_t without constant term, of degree 2n
// for n = 0..max_modes, weighted by binomial errors (or a relative floor for
// exact samples). Throws EstimationError when samples < 2 max_modes + 1 or
// eff_t values repeat.
[[nodiscard]] ModeFitReport fit_mode_polynomials(std::span<const NoClickSample> samples,
                                                 int max_modes);

// Smallest mode count whose fit passes; throws EstimationError if none does.
[[nodiscard]] int mode_count_fit(std::span<const NoClickSample> samples, int max_modes);

}  // namespace sqz
