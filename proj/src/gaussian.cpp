#include "sqz/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sqz/errors.hpp"

namespace sqz {

namespace {

void require_transmittance(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream msg;
    msg << what << " must lie in [0, 1], got " << t;
    throw DomainError(msg.str());
  }
}

}  // namespace

bool CovarianceMatrix::is_physical() const {
  return vxx > 0.0 && vpp > 0.0 && check_physicality(trace(), det());
}

void validate(const SqueezerParams& params) {
  if (!(params.g >= 1.0) || !(params.h >= 1.0)) {
    std::ostringstream msg;
    msg << "squeezer gains must satisfy g >= 1 and h >= 1, got g=" << params.g
        << " h=" << params.h;
    throw UnphysicalError(msg.str());
  }
}

void validate(const CovarianceMatrix& cov) {
  if (!cov.is_physical()) {
    std::ostringstream msg;
    msg << "covariance matrix (" << cov.vxx << ", " << cov.vpp << ", " << cov.vxp
        << ") violates det >= 1 or positivity";
    throw UnphysicalError(msg.str());
  }
}

CovarianceMatrix cov_from_squeezer(const SqueezerParams& params) {
  validate(params);
  const double thermal = 2.0 * params.h - 1.0;
  return {thermal / params.g, thermal * params.g, 0.0};
}

SqueezerParams squeezer_from_invariants(double trace, double det) {
  const QuadratureVariances v = variances_from_invariants(trace, det);
  return {std::sqrt(v.vmax / v.vmin), std::max(1.0, 0.5 * (std::sqrt(det) + 1.0))};
}

QuadratureVariances variances_from_invariants(double trace, double det) {
  if (!check_physicality(trace, det)) {
    std::ostringstream msg;
    msg << "invariants (trace=" << trace << ", det=" << det << ") are unphysical";
    throw UnphysicalError(msg.str());
  }
  double disc = trace * trace - 4.0 * det;
  if (disc < 0.0) {
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double vmax = 0.5 * (trace + root);
  // vmin from the product avoids cancellation when trace ~ root.
  const double vmin = vmax > 0.0 ? det / vmax : 0.5 * (trace - root);
  return {vmin, vmax};
}

double purity(const CovarianceMatrix& cov) { return 1.0 / std::sqrt(cov.det()); }

double purity_from_h(double h) {
  if (!(h >= 1.0)) {
    throw UnphysicalError("thermal gain h must be >= 1");
  }
  return 1.0 / (2.0 * h - 1.0);
}

CovarianceMatrix apply_beamsplitter(const CovarianceMatrix& cov, double t) {
  require_transmittance(t, "beamsplitter transmittance");
  return {t * cov.vxx + (1.0 - t), t * cov.vpp + (1.0 - t), t * cov.vxp};
}

double q_function(const CovarianceMatrix& cov, double x, double p) {
  // (gamma + I)^-1 written out for the symmetric 2x2 case.
  const double a = cov.vxx + 1.0;
  const double d = cov.vpp + 1.0;
  const double b = cov.vxp;
  const double det_shifted = a * d - b * b;
  const double quad = (d * x * x - 2.0 * b * x * p + a * p * p) / det_shifted;
  return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det_shifted));
}

double no_click_probability(const CovarianceMatrix& cov) {
  const double a = cov.vxx + 1.0;
  const double d = cov.vpp + 1.0;
  return 2.0 / std::sqrt(a * d - cov.vxp * cov.vxp);
}

double inverse_square_no_click(double trace, double det, double eff_t) {
  require_transmittance(eff_t, "effective transmittance");
  const double r = 2.0 - eff_t;
  return eff_t * eff_t * det + eff_t * r * trace + r * r;
}

double no_click_from_invariants(double trace, double det, double eff_t) {
  return std::min(1.0, 2.0 / std::sqrt(inverse_square_no_click(trace, det, eff_t)));
}

double click_from_invariants(double trace, double det, double eff_t) {
  require_transmittance(eff_t, "effective transmittance");
  // s - 4 in its polynomial form, exact zero for vacuum or eff_t = 0.
  const double excess =
      eff_t * eff_t * (det - trace + 1.0) + 2.0 * eff_t * (trace - 2.0);
  const double root = std::sqrt(4.0 + excess);
  return excess / (root * (root + 2.0));
}

GainBounds gain_bounds_from_trace(double trace) {
  if (!(trace >= 2.0 - kPhysicalityTolerance)) {
    std::ostringstream msg;
    msg << "trace must be >= 2 for gain bounds, got " << trace;
    throw DomainError(msg.str());
  }
  const double root = std::sqrt(std::max(0.0, trace * trace - 4.0));
  return {std::sqrt((trace + root) / (trace - root)), (trace + 2.0) / 4.0};
}

bool check_physicality(double trace, double det) {
  if (!std::isfinite(trace) || !std::isfinite(det) || trace <= 0.0) {
    return false;
  }
  const double half = 0.5 * trace;
  return det >= 1.0 - kPhysicalityTolerance && det <= half * half + kPhysicalityTolerance;
}

}  // namespace sqz
