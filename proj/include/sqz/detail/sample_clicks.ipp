#pragma once

#include <algorithm>
#include <cmath>
#include <random>

namespace sqz {

template <class Rng>
std::int64_t sample_clicks(std::int64_t trials, double q, Rng& rng) {
  if (trials <= 0 || q <= 0.0) {
    return 0;
  }
  if (q >= 1.0) {
    return trials;
  }
  const double n = static_cast<double>(trials);
  const double variance = n * q * (1.0 - q);
  if (variance > kNormalApproxVariance) {
    std::normal_distribution<double> normal(n * q, std::sqrt(variance));
    const double draw = std::round(normal(rng));
    return static_cast<std::int64_t>(std::clamp(draw, 0.0, n));
  }
  std::binomial_distribution<std::int64_t> binomial(trials, q);
  return binomial(rng);
}

}  // namespace sqz
