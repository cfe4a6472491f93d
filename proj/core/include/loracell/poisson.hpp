#pragma once

#include <cmath>

namespace loracell {

inline double poisson_pmf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

inline double poisson_cdf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  double term = std::exp(-mean);
  double sum = term;
  for (int i = 1; i <= k; ++i) {
    term *= mean / i;
    sum += term;
  }
  return sum;
}

/// Smallest K with P(X <= K) >= 1 - tail_eps for X ~ Poisson(mean), capped.
inline int poisson_truncation_order(double mean, double tail_eps = 1e-9, int cap = 200) {
  if (mean == 0.0) return 0;
  double term = std::exp(-mean);
  double sum = term;
  int k = 0;
  while (sum < 1.0 - tail_eps && k < cap) {
    ++k;
    term *= mean / k;
    sum += term;
  }
  return k;
}

}  // namespace loracell
