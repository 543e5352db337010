#pragma once

// Covariance-matrix algebra for zero-mean single-mode Gaussian states.
//
// Units: quadratures x = a + a^dag, p = (a - a^dag)/i with [x, p] = 2i, so
// the vacuum has unit variance in both quadratures. Every function in this
// library assumes that convention.

#include <utility>

namespace sqz {

// Absolute slack on physicality inequalities (det >= 1, trace >= 2 sqrt(det)).
inline constexpr double kPhysicalityTolerance = 1e-9;

struct CovarianceMatrix {
  double vxx = 1.0;  // <x^2>
  double vpp = 1.0;  // <p^2>
  double vxp = 0.0;  // (1/2) <xp + px>

  [[nodiscard]] double trace() const { return vxx + vpp; }
  [[nodiscard]] double det() const { return vxx * vpp - vxp * vxp; }
  [[nodiscard]] bool is_physical() const;

  static CovarianceMatrix vacuum() { return {}; }
};

// Gains of the "black box" squeezer: a phase-insensitive amplifier of
// intensity gain h followed by a phase-sensitive amplifier of gain g (x is
// de-amplified by 1/g). The thermal photon number is h - 1.
struct SqueezerParams {
  double g = 1.0;
  double h = 1.0;
};

struct QuadratureVariances {
  double vmin = 1.0;
  double vmax = 1.0;
};

// Throws UnphysicalError unless g >= 1 and h >= 1.
void validate(const SqueezerParams& params);
// Throws UnphysicalError if the matrix is not a valid quantum covariance.
void validate(const CovarianceMatrix& cov);

[[nodiscard]] CovarianceMatrix cov_from_squeezer(const SqueezerParams& params);

// Inverse of cov_from_squeezer on the invariants: g = sqrt(vmax / vmin),
// h = (sqrt(det) + 1) / 2. Throws UnphysicalError.
[[nodiscard]] SqueezerParams squeezer_from_invariants(double trace, double det);

// Squeezed / anti-squeezed variances from the invariants. A discriminant in
// [-tol, 0) is clamped to zero; anything lower throws UnphysicalError.
[[nodiscard]] QuadratureVariances variances_from_invariants(double trace, double det);

[[nodiscard]] double purity(const CovarianceMatrix& cov);
[[nodiscard]] double purity_from_h(double h);

// Lossy beamsplitter of intensity transmittance t with vacuum in the other port.
[[nodiscard]] CovarianceMatrix apply_beamsplitter(const CovarianceMatrix& cov, double t);

// Husimi Q function, normalised so that its integral over dx dp equals one.
[[nodiscard]] double q_function(const CovarianceMatrix& cov, double x, double p);

// Vacuum overlap <0|rho|0> = 2 / sqrt(det(gamma + I)).
[[nodiscard]] double no_click_probability(const CovarianceMatrix& cov);

// 4 / P^2 after a beamsplitter of effective transmittance eff_t, as a
// function of the invariants only:
//   eff_t^2 det + eff_t (2 - eff_t) trace + (2 - eff_t)^2.
[[nodiscard]] double inverse_square_no_click(double trace, double det, double eff_t);

[[nodiscard]] double no_click_from_invariants(double trace, double det, double eff_t);

// 1 - no_click_from_invariants, computed without cancellation for small eff_t.
[[nodiscard]] double click_from_invariants(double trace, double det, double eff_t);

// Upper bounds on (g, h) compatible with a known trace and an unknown det in
// the physical range. Both lower bounds are 1.
struct GainBounds {
  double g_max = 1.0;
  double h_max = 1.0;
};
[[nodiscard]] GainBounds gain_bounds_from_trace(double trace);

// 1 <= det <= (trace / 2)^2, with kPhysicalityTolerance slack.
[[nodiscard]] bool check_physicality(double trace, double det);

}  // namespace sqz
