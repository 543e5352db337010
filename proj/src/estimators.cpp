#include "sqz/estimators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "sqz/errors.hpp"

namespace sqz {

namespace {

constexpr double kMinTransmittanceGap = 1e-6;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_unit_interval(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << what << " must lie in (0, 1], got " << v;
    throw DomainError(msg.str());
  }
}

// Click record with the quantities the likelihood needs precomputed.
struct PreparedRecord {
  double eff_t;
  double no_clicks;
  double clicks;
};

std::vector<PreparedRecord> prepare(std::span<const ClickRecord> data, double eta) {
  std::vector<PreparedRecord> out;
  out.reserve(data.size());
  for (const ClickRecord& r : data) {
    if (r.trials < 0 || r.clicks < 0 || r.clicks > r.trials) {
      std::ostringstream msg;
      msg << "click record needs 0 <= clicks <= trials, got clicks=" << r.clicks
          << " trials=" << r.trials;
      throw DomainError(msg.str());
    }
    if (!(r.t_nominal >= 0.0 && r.t_nominal <= 1.0)) {
      throw DomainError("click record transmittance must lie in [0, 1]");
    }
    out.push_back({eta * r.t_nominal, static_cast<double>(r.trials - r.clicks),
                   static_cast<double>(r.clicks)});
  }
  return out;
}

// Unchecked log-likelihood; the caller guarantees physical (trace, det).
double log_likelihood_unchecked(double trace, double det,
                                const std::vector<PreparedRecord>& data) {
  const double quad = det - trace + 1.0;
  const double lin = 2.0 * (trace - 2.0);
  double total = 0.0;
  for (const PreparedRecord& r : data) {
    const double excess = r.eff_t * (r.eff_t * quad + lin);
    if (excess <= 0.0) {
      // No-click is certain.
      if (r.clicks > 0.0) {
        return kNegInf;
      }
      continue;
    }
    const double root = std::sqrt(4.0 + excess);
    const double log_p = -0.5 * std::log1p(0.25 * excess);
    const double q = excess / (root * (root + 2.0));
    total += r.no_clicks * log_p;
    if (r.clicks > 0.0) {
      total += r.clicks * std::log(q);
    }
  }
  return total;
}

bool admissible(double trace, double det) {
  const double half = 0.5 * trace;
  return trace >= 2.0 - kPhysicalityTolerance && det >= 1.0 - kPhysicalityTolerance &&
         det <= half * half + kPhysicalityTolerance;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> axis(n);
  if (n == 1) {
    axis[0] = lo;
    return axis;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    axis[i] = lo + step * static_cast<double>(i);
  }
  axis.back() = hi;
  return axis;
}

// Axis of n points with the given spacing centred on `center`, shifted up so
// that it does not start below `floor`.
std::vector<double> centred_axis(double center, double spacing, std::size_t n, double floor) {
  double start = center - spacing * static_cast<double>(n - 1) / 2.0;
  start = std::max(start, floor);
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) {
    axis[i] = start + spacing * static_cast<double>(i);
  }
  return axis;
}

struct GridPoint {
  double trace = 2.0;
  double det = 1.0;
  double log_l = kNegInf;
};

// Total order used for the argmax: higher log L wins, ties go to the smaller
// det, then to the smaller trace.
bool better(const GridPoint& a, const GridPoint& b) {
  if (a.log_l != b.log_l) {
    return a.log_l > b.log_l;
  }
  if (a.det != b.det) {
    return a.det < b.det;
  }
  return a.trace < b.trace;
}

GridPoint search_grid(const std::vector<PreparedRecord>& data, const std::vector<double>& traces,
                      const std::vector<double>& dets) {
  GridPoint best;
  bool found = false;
  for (const double trace : traces) {
    for (const double det : dets) {
      if (!admissible(trace, det)) {
        continue;
      }
      const GridPoint candidate{trace, det, log_likelihood_unchecked(trace, det, data)};
      if (!found || better(candidate, best)) {
        best = candidate;
        found = true;
      }
    }
  }
  return best;
}


// Upper end of the trace search: 2 + 10 max_j (4/P_j^2 - 4) / (2 eff_t_j),
// with P_j the observed no-click fraction.
double trace_search_bound(std::span<const ClickRecord> data, double eta) {
  double linear_max = 0.0;
  for (const ClickRecord& r : data) {
    const double eff_t = eta * r.t_nominal;
    if (eff_t <= 0.0 || r.trials <= 0) {
      continue;
    }
    const double n = static_cast<double>(r.trials);
    const double p_hat = std::max(1.0 - static_cast<double>(r.clicks) / n, 0.5 / n);
    linear_max = std::max(linear_max, (4.0 / (p_hat * p_hat) - 4.0) / (2.0 * eff_t));
  }
  return 2.0 + 10.0 * std::max(linear_max, 1e-6);
}

// max over trace of log L at fixed det, by a 1-D coarse-to-fine grid on
// [2 sqrt(det), trace_hi].
double profile_unchecked(double det, double trace_hi, const std::vector<PreparedRecord>& data,
                         const MlOptions& options) {
  const double trace_lo = 2.0 * std::sqrt(det);
  if (trace_hi <= trace_lo) {
    return log_likelihood_unchecked(trace_lo, det, data);
  }
  const std::size_t n = options.points_per_axis;
  double lo = trace_lo;
  double step = (trace_hi - trace_lo) / static_cast<double>(n - 1);
  double best_trace = trace_lo;
  double best = kNegInf;
  constexpr double kProfileResolution = 1e-7;
  for (std::size_t stage = 0; stage < 16; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      const double trace = std::max(trace_lo, lo + step * static_cast<double>(i));
      const double ll = log_likelihood_unchecked(trace, det, data);
      if (ll > best) {
        best = ll;
        best_trace = trace;
      }
    }
    if (step <= kProfileResolution) {
      break;
    }
    step /= options.refinement;
    lo = std::max(trace_lo, best_trace - step * static_cast<double>(n - 1) / 2.0);
  }
  return best;
}

}  // namespace

DerivedQuantities derive_quantities(double trace, double det) {
  DerivedQuantities d;
  d.variances = variances_from_invariants(trace, det);
  d.purity = 1.0 / std::sqrt(det);
  d.gain_bounds = gain_bounds_from_trace(trace);
  return d;
}

Invariants invert_two_point(double t1, double p1, double t2, double p2) {
  require_unit_interval(t1, "t1");
  require_unit_interval(t2, "t2");
  require_unit_interval(p1, "p1");
  require_unit_interval(p2, "p2");
  if (std::abs(t1 - t2) < kMinTransmittanceGap) {
    std::ostringstream msg;
    msg << "effective transmittances too close for inversion: " << t1 << " vs " << t2;
    throw DomainError(msg.str());
  }
  const double a1 = 1.0 / (t1 * p1 * p1);
  const double a2 = 1.0 / (t2 * p2 * p2);
  Invariants out;
  out.trace = 2.0 / (t2 - t1) * (t2 * a1 - t1 * a2) + 2.0 - 2.0 / t1 - 2.0 / t2;
  out.det = 2.0 / (t1 - t2) * ((2.0 - t2) * a1 - (2.0 - t1) * a2) +
            (2.0 - t1) * (2.0 - t2) / (t1 * t2);
  return out;
}

Sensitivity sensitivity(double p1, double eta) {
  require_unit_interval(p1, "p1");
  require_unit_interval(eta, "eta");
  const double p_cubed = p1 * p1 * p1;
  return {4.0 / (eta * p_cubed), -16.0 / (eta * eta * p_cubed)};
}

double log_likelihood(double trace, double det, std::span<const ClickRecord> data,
                      double eta_assumed) {
  if (!check_physicality(trace, det)) {
    std::ostringstream msg;
    msg << "log-likelihood requested at unphysical (trace=" << trace << ", det=" << det << ")";
    throw UnphysicalError(msg.str());
  }
  if (data.empty()) {
    throw EstimationError("log-likelihood needs at least one click record");
  }
  require_unit_interval(eta_assumed, "eta_assumed");
  return log_likelihood_unchecked(trace, det, prepare(data, eta_assumed));
}

double profile_log_likelihood(double det, std::span<const ClickRecord> data, double eta_assumed,
                              const MlOptions& options) {
  if (!(det >= 1.0 - kPhysicalityTolerance) || !std::isfinite(det)) {
    throw UnphysicalError("profile likelihood needs det >= 1");
  }
  if (data.empty()) {
    throw EstimationError("profile likelihood needs at least one click record");
  }
  require_unit_interval(eta_assumed, "eta_assumed");
  const double trace_hi = std::max(trace_search_bound(data, eta_assumed), 2.0 * std::sqrt(det));
  return profile_unchecked(det, trace_hi, prepare(data, eta_assumed), options);
}

LikelihoodGrid evaluate_likelihood_grid(std::span<const ClickRecord> data, double eta_assumed,
                                        std::vector<double> trace_axis,
                                        std::vector<double> det_axis) {
  require_unit_interval(eta_assumed, "eta_assumed");
  const auto prepared = prepare(data, eta_assumed);
  LikelihoodGrid grid;
  grid.trace_axis = std::move(trace_axis);
  grid.det_axis = std::move(det_axis);
  const std::size_t n = grid.trace_axis.size() * grid.det_axis.size();
  grid.log_l.assign(n, kExcludedLogLikelihood);
  grid.excluded.assign(n, 1);
  for (std::size_t i = 0; i < grid.trace_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.det_axis.size(); ++j) {
      const double trace = grid.trace_axis[i];
      const double det = grid.det_axis[j];
      if (!admissible(trace, det)) {
        continue;
      }
      const std::size_t k = i * grid.det_axis.size() + j;
      grid.excluded[k] = 0;
      grid.log_l[k] = log_likelihood_unchecked(trace, det, prepared);
    }
  }
  return grid;
}

Estimate ml_estimate(std::span<const ClickRecord> data, double eta_assumed,
                     const MlOptions& options) {
  require_unit_interval(eta_assumed, "eta_assumed");
  if (options.points_per_axis < 2 || !(options.refinement > 1.0)) {
    throw DomainError("grid search needs >= 2 points per axis and refinement > 1");
  }
  const auto prepared = prepare(data, eta_assumed);

  std::set<double> distinct;
  for (const ClickRecord& r : data) {
    if (r.t_nominal > 0.0 && r.trials > 0) {
      distinct.insert(r.t_nominal);
    }
  }
  if (distinct.size() < 2) {
    throw EstimationError("maximum-likelihood estimation needs at least two distinct "
                          "non-zero transmittances");
  }

  Estimate est;
  const bool any_clicks =
      std::any_of(data.begin(), data.end(), [](const ClickRecord& r) { return r.clicks > 0; });
  if (!any_clicks) {
    est.derived = derive_quantities(est.trace, est.det);
    return est;
  }

  const double trace_hi = trace_search_bound(data, eta_assumed);
  const double det_hi = 0.25 * trace_hi * trace_hi;

  const std::size_t n = options.points_per_axis;
  std::vector<double> traces = linspace(2.0, trace_hi, n);
  std::vector<double> dets = linspace(1.0, det_hi, n);
  double trace_step = (trace_hi - 2.0) / static_cast<double>(n - 1);
  double det_step = (det_hi - 1.0) / static_cast<double>(n - 1);

  GridPoint best = search_grid(prepared, traces, dets);
  constexpr std::size_t kMaxStages = 16;
  for (std::size_t stage = 1; stage < kMaxStages; ++stage) {
    const bool resolved =
        trace_step <= options.final_resolution && det_step <= options.final_resolution;
    if (resolved && stage >= options.min_stages) {
      break;
    }
    trace_step /= options.refinement;
    det_step /= options.refinement;
    traces = centred_axis(best.trace, trace_step, n, 2.0);
    dets = centred_axis(best.det, det_step, n, 1.0);
    const GridPoint refined = search_grid(prepared, traces, dets);
    if (better(refined, best)) {
      best = refined;
    }
  }
  if (!std::isfinite(best.log_l)) {
    throw EstimationError("click data are impossible under every physical state "
                          "(clicks recorded at zero effective transmittance)");
  }

  // Identifiability of det: spread of the profile log-likelihood (trace
  // re-maximised) across the admissible det interval at the optimal trace.
  const double det_top = std::max(1.0, 0.25 * best.trace * best.trace);
  double lo = std::numeric_limits<double>::infinity();
  double hi = kNegInf;
  for (const double det : linspace(1.0, det_top, options.flatness_samples)) {
    const double ll = profile_unchecked(det, trace_hi, prepared, options);
    lo = std::min(lo, ll);
    hi = std::max(hi, ll);
  }
  const double spread = std::max(hi, best.log_l) - lo;

  est.trace = best.trace;
  est.det = std::clamp(best.det, 1.0, det_top);
  est.det_reliable = !(spread < options.flatness_threshold);
  est.log_likelihood_at_max = best.log_l;
  est.derived = derive_quantities(est.trace, est.det);
  return est;
}

SqueezerParams classical_estimate(double gain_min, double gain_max) {
  if (!(gain_min > 0.0) || !(gain_max > 0.0)) {
    throw DomainError("classical gains must be positive");
  }
  if (gain_min > gain_max) {
    throw DomainError("de-amplification gain must not exceed the amplification gain");
  }
  SqueezerParams params{std::sqrt(gain_max / gain_min), std::sqrt(gain_max * gain_min)};
  if (params.h < 1.0 - kPhysicalityTolerance) {
    std::ostringstream msg;
    msg << "classical gains imply h=" << params.h << " < 1";
    throw UnphysicalError(msg.str());
  }
  params.h = std::max(params.h, 1.0);
  return params;
}

QuadratureVariances homodyne_correct(double v_hom_min, double v_hom_max, double eta_hom) {
  require_unit_interval(eta_hom, "eta_hom");
  const QuadratureVariances v{(v_hom_min - 1.0 + eta_hom) / eta_hom,
                              (v_hom_max - 1.0 + eta_hom) / eta_hom};
  if (!(v.vmin > 0.0) || v.vmin * v.vmax < 1.0 - kPhysicalityTolerance) {
    std::ostringstream msg;
    msg << "loss-corrected variances (" << v.vmin << ", " << v.vmax
        << ") violate the uncertainty relation";
    throw UnphysicalError(msg.str());
  }
  return v;
}

double estimate_eta(std::span<const ClickRatePoint> points, double rep_rate) {
  if (!(rep_rate > 0.0)) {
    throw DomainError("rep_rate must be positive");
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (const ClickRatePoint& pt : points) {
    validate(pt.params);
    const double g = pt.params.g;
    const double x = 0.5 * rep_rate * ((pt.params.h - 0.5) * (g + 1.0 / g) - 1.0);
    sxy += x * pt.rate;
    sxx += x * x;
  }
  if (!(sxx > 0.0)) {
    throw EstimationError("click-rate predictors all vanish; eta is not identifiable");
  }
  const double eta = sxy / sxx;
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "fitted efficiency " << eta << " lies outside (0, 1]";
    throw EstimationError(msg.str());
  }
  return eta;
}

ModeFitReport fit_mode_polynomials(std::span<const NoClickSample> samples, int max_modes) {
  if (max_modes < 0) {
    throw DomainError("max_modes must be non-negative");
  }
  const auto m = static_cast<Eigen::Index>(samples.size());
  if (m < 2 * max_modes + 1) {
    std::ostringstream msg;
    msg << "mode fit up to " << max_modes << " modes needs at least " << 2 * max_modes + 1
        << " samples, got " << m;
    throw EstimationError(msg.str());
  }
  std::vector<double> sorted_t;
  for (const NoClickSample& s : samples) {
    require_unit_interval(s.p, "no-click probability");
    if (!(s.eff_t >= 0.0 && s.eff_t <= 1.0)) {
      throw DomainError("effective transmittance must lie in [0, 1]");
    }
    sorted_t.push_back(s.eff_t);
  }
  std::sort(sorted_t.begin(), sorted_t.end());
  if (std::adjacent_find(sorted_t.begin(), sorted_t.end(), [](double a, double b) {
        return std::abs(a - b) < 1e-12;
      }) != sorted_t.end()) {
    throw EstimationError("mode fit needs distinct effective transmittances");
  }

  // Weighted data y = P^-2 - 1, whose constant term is zero for any state.
  Eigen::VectorXd y(m);
  Eigen::VectorXd weight(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const NoClickSample& s = samples[static_cast<std::size_t>(i)];
    const double inv_sq = 1.0 / (s.p * s.p);
    y(i) = inv_sq - 1.0;
    // Relative floor stands in for rounding error on exact samples.
    double sigma = 1e-10 * inv_sq;
    if (s.trials > 0) {
      const double sigma_p = std::sqrt(s.p * (1.0 - s.p) / static_cast<double>(s.trials));
      sigma = std::max(sigma, 2.0 * inv_sq / s.p * sigma_p);
    }
    weight(i) = 1.0 / sigma;
  }

  ModeFitReport report;
  for (int modes = 0; modes <= max_modes; ++modes) {
    const Eigen::Index degree = 2 * modes;
    Eigen::VectorXd residual = y;
    if (degree > 0) {
      Eigen::MatrixXd design(m, degree);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double t = samples[static_cast<std::size_t>(i)].eff_t;
        double power = t;
        for (Eigen::Index k = 0; k < degree; ++k) {
          design(i, k) = power;
          power *= t;
        }
      }
      const Eigen::MatrixXd wdesign = weight.asDiagonal() * design;
      const Eigen::VectorXd wy = weight.cwiseProduct(y);
      const Eigen::VectorXd coef = wdesign.colPivHouseholderQr().solve(wy);
      residual = y - design * coef;
    }
    const double chi2 = weight.cwiseProduct(residual).squaredNorm();
    report.chi2_per_dof.push_back(chi2 / static_cast<double>(m - degree));
    report.max_abs_residual.push_back(residual.cwiseAbs().maxCoeff());
    if (!report.modes && report.chi2_per_dof.back() < kModeFitChi2Threshold) {
      report.modes = modes;
    }
  }
  return report;
}

int mode_count_fit(std::span<const NoClickSample> samples, int max_modes) {
  const ModeFitReport report = fit_mode_polynomials(samples, max_modes);
  if (!report.modes) {
    std::ostringstream msg;
    msg << "no polynomial of degree <= " << 2 * max_modes << " fits the samples";
    throw EstimationError(msg.str());
  }
  return *report.modes;
}

}  // namespace sqz
