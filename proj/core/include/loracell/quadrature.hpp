#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

// Adaptive Gauss-Kronrod integration and cubic-spline tabulation, both
// thread-safe. Backed by GSL behind this interface.

namespace loracell {

struct IntegralResult {
  double value = 0.0;
  double abs_error = 0.0;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), abs_error_(error) {}

  double estimate() const { return estimate_; }
  double abs_error() const { return abs_error_; }

 private:
  double estimate_;
  double abs_error_;
};

/// Integrate f over [a, b] to the given absolute tolerance. Throws
/// QuadratureError (carrying the best estimate and its error bound) if the
/// tolerance cannot be reached.
IntegralResult integrate(const std::function<double(double)>& f, double a, double b,
                         double abs_tol = 1e-10);

/// Natural cubic spline through (x, y) samples; evaluation clamps to the
/// tabulated range. Evaluation is const and safe from multiple threads.
class SplineTable {
 public:
  SplineTable(std::vector<double> x, std::vector<double> y);
  SplineTable(SplineTable&&) noexcept;
  SplineTable& operator=(SplineTable&&) noexcept;
  ~SplineTable();

  double operator()(double x) const;
  double min_x() const;
  double max_x() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace loracell
