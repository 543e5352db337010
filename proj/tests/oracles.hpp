#pragma once

// Test-only reference computations, deliberately independent of the
// library's formulas.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

namespace sqz::oracle {

// Bisection root of f on [lo, hi], f(lo) and f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Vacuum overlap of a pure squeezed vacuum with squeezed variance vmin,
// summed from its photon-number distribution: only the n = 0 term of
// P(2n) = (2n)! / (4^n (n!)^2) tanh^{2n}(r) / cosh(r) survives the
// projection, and the full sum must be one.
inline std::pair<double, double> fock_vacuum_overlap(double vmin, int terms = 2000) {
  const double r = -0.5 * std::log(vmin);
  const double t2 = std::pow(std::tanh(r), 2);
  double term = 1.0 / std::cosh(r);
  double total = 0.0;
  const double p0 = term;
  for (int n = 0; n < terms; ++n) {
    total += term;
    // ratio P(2n+2)/P(2n) = (2n+1)(2n+2) / (4 (n+1)^2) tanh^2 r
    term *= (2.0 * n + 1.0) * (2.0 * n + 2.0) / (4.0 * (n + 1.0) * (n + 1.0)) * t2;
  }
  return {p0, total};
}

// Midpoint-rule polar integral of f over the disc of given radius.
inline double integrate_disc(const std::function<double(double, double)>& f, double radius,
                             int n_r = 2000, int n_phi = 720) {
  const double dr = radius / n_r;
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  double sum = 0.0;
  for (int i = 0; i < n_r; ++i) {
    const double r = (i + 0.5) * dr;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * dphi;
      sum += f(r * std::cos(phi), r * std::sin(phi)) * r;
    }
  }
  return sum * dr * dphi;
}

// det(gamma_t + I) built element-wise from the mixed matrix, no invariants.
inline double no_click_matrix_route(double vxx, double vpp, double vxp, double t) {
  const double a = t * vxx + (1.0 - t) + 1.0;
  const double d = t * vpp + (1.0 - t) + 1.0;
  const double b = t * vxp;
  return 2.0 / std::sqrt(a * d - b * b);
}

// Solve the 2x2 system 4/P_j^2 - (2 - t_j)^2 = t_j (2 - t_j) trace + t_j^2 det
// by Cramer's rule.
inline std::pair<double, double> cramer_inversion(double t1, double p1, double t2, double p2) {
  const double a11 = t1 * (2.0 - t1), a12 = t1 * t1;
  const double a21 = t2 * (2.0 - t2), a22 = t2 * t2;
  const double b1 = 4.0 / (p1 * p1) - (2.0 - t1) * (2.0 - t1);
  const double b2 = 4.0 / (p2 * p2) - (2.0 - t2) * (2.0 - t2);
  const double d = a11 * a22 - a12 * a21;
  return {(b1 * a22 - a12 * b2) / d, (a11 * b2 - b1 * a21) / d};
}

}  // namespace sqz::oracle
