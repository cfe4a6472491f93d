#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace loracell {

struct WilsonInterval {
  double low = std::numeric_limits<double>::quiet_NaN();
  double high = std::numeric_limits<double>::quiet_NaN();
};

/// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
inline WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                                      double z = 1.96) {
  if (trials <= 0) return {};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

/// Standard error of the mean from per-replication estimates.
inline double std_error(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace loracell
