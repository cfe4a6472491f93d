#include "loracell/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_interp.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <mutex>
#include <string>

namespace loracell {

namespace {

constexpr std::size_t kWorkspaceLimit = 2048;

void disable_gsl_abort() {
  // GSL aborts the process by default; status codes are handled here instead.
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double trampoline(double x, void* params) {
  const auto* f = static_cast<const std::function<double(double)>*>(params);
  return (*f)(x);
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const {
    gsl_integration_workspace_free(w);
  }
};

}  // namespace

IntegralResult integrate(const std::function<double(double)>& f, double a, double b,
                         double abs_tol) {
  disable_gsl_abort();
  thread_local std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> workspace(
      gsl_integration_workspace_alloc(kWorkspaceLimit));

  gsl_function gf;
  gf.function = &trampoline;
  gf.params = const_cast<std::function<double(double)>*>(&f);

  double value = 0.0;
  double error = 0.0;
  const int status =
      gsl_integration_qag(&gf, a, b, abs_tol, 0.0, kWorkspaceLimit,
                          GSL_INTEG_GAUSS21, workspace.get(), &value, &error);
  if (status != GSL_SUCCESS && error > abs_tol) {
    throw QuadratureError(std::string("quadrature did not converge: ") +
                              gsl_strerror(status),
                          value, error);
  }
  return IntegralResult{value, error};
}

struct SplineTable::Impl {
  std::vector<double> x;
  std::vector<double> y;
  gsl_spline* spline = nullptr;

  ~Impl() {
    if (spline != nullptr) gsl_spline_free(spline);
  }
};

SplineTable::SplineTable(std::vector<double> x, std::vector<double> y)
    : impl_(std::make_unique<Impl>()) {
  if (x.size() != y.size() || x.size() < 4) {
    throw std::invalid_argument("spline table needs >= 4 matched samples");
  }
  impl_->x = std::move(x);
  impl_->y = std::move(y);
  impl_->spline = gsl_spline_alloc(gsl_interp_cspline, impl_->x.size());
  gsl_spline_init(impl_->spline, impl_->x.data(), impl_->y.data(), impl_->x.size());
}

SplineTable::SplineTable(SplineTable&&) noexcept = default;
SplineTable& SplineTable::operator=(SplineTable&&) noexcept = default;
SplineTable::~SplineTable() = default;

double SplineTable::operator()(double x) const {
  x = std::clamp(x, impl_->x.front(), impl_->x.back());
  // Null accelerator keeps evaluation stateless and thread-safe.
  return gsl_spline_eval(impl_->spline, x, nullptr);
}

double SplineTable::min_x() const { return impl_->x.front(); }
double SplineTable::max_x() const { return impl_->x.back(); }

}  // namespace loracell
