#include "loracell/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "loracell/poisson.hpp"
#include "loracell/quadrature.hpp"
#include "loracell/units.hpp"

namespace loracell {

namespace {

// Suppression factor a single Rayleigh interferer at distance r applies to
// the Laplace transform of the interference seen at r_i:
// 1 / (1 + Gamma * (r_i / r)^alpha).
double rayleigh_kernel(double ri, double r, double gamma_lin, double alpha) {
  return 1.0 / (1.0 + gamma_lin * std::pow(ri / r, alpha));
}

struct TruncatedPoisson {
  std::vector<double> pmf;  // pmf[k], k = 0..K
  int order = 0;            // K
  double discarded = 0.0;   // 1 - sum(pmf)

  // sum_{k=1..K} pmf[k] * x^k
  double weighted_powers(double x) const {
    double acc = 0.0;
    double xp = 1.0;
    for (int k = 1; k <= order; ++k) {
      xp *= x;
      acc += pmf[k] * xp;
    }
    return acc;
  }
};

TruncatedPoisson truncate_poisson(double mean, double tail_eps, int cap) {
  TruncatedPoisson out;
  out.order = poisson_truncation_order(mean, tail_eps, cap);
  out.pmf.resize(out.order + 1);
  double term = std::exp(-mean);
  double sum = 0.0;
  for (int k = 0; k <= out.order; ++k) {
    if (k > 0) term *= mean / k;
    out.pmf[k] = term;
    sum += term;
  }
  out.discarded = std::max(0.0, 1.0 - sum);
  return out;
}

}  // namespace

struct AnalyticEngine::Impl {
  PhyConfig phy;
  CaptureThresholds thresholds;
  AllocationSet alloc;
  std::array<FrameTiming, kSpreadingFactorCount> timings;
  double c = 0.0;      // link-budget constant
  double alpha = 0.0;  // path loss exponent
  double gamma_co = 0.0;  // co-SF threshold, linear
  std::array<double, kSpreadingFactorCount> gamma_snr{};    // Gamma_m, linear
  std::array<double, kSpreadingFactorCount> gamma_inter{};  // Gamma_int_m, linear
  // Inter-SF interferer SF law for a victim of SF m: weights proportional
  // to the load share (T_f_p + T_f_m) * delta_p over p != m.
  std::array<std::array<double, kSpreadingFactorCount>, kSpreadingFactorCount>
      mix_weight{};
  std::array<double, kSpreadingFactorCount> coverage{};
  std::array<double, kSpreadingFactorCount> coverage_error{};
  // Tabulated kernels per SF: co-SF I, inter-SF with Gamma_int (Itilde),
  // inter-SF with Gamma_co (Iprime).
  std::vector<SplineTable> kernel_co;
  std::vector<SplineTable> kernel_inter;
  std::vector<SplineTable> kernel_inter_co;

  double signal_weight(int i, double gamma_lin, double r) const {
    const Annulus& a = alloc.support[i];
    if (!a.contains(r)) return 0.0;
    const double pdf = 2.0 * r / (a.outer * a.outer - a.inner * a.inner);
    return std::exp(-gamma_lin * std::pow(r, alpha) / c) * pdf;
  }

  // One interferer drawn from g_p: integral of g_p(r) * kernel over p's support.
  double interferer_factor(int p, double ri, double gamma_lin) const {
    const Annulus& a = alloc.support[p];
    const double norm = a.outer * a.outer - a.inner * a.inner;
    const auto f = [&](double r) {
      if (r <= 0.0) return 0.0;
      return (2.0 * r / norm) * rayleigh_kernel(ri, r, gamma_lin, alpha);
    };
    return integrate(f, a.inner, a.outer, kQuadratureTol).value;
  }

  double mixture_factor(int i, double ri, double gamma_lin) const {
    double acc = 0.0;
    for (int p = 0; p < kSpreadingFactorCount; ++p) {
      const double w = mix_weight[i][p];
      if (w > 0.0) acc += w * interferer_factor(p, ri, gamma_lin);
    }
    return acc;
  }

  SplineTable tabulate(int i, double gamma_lin, bool mixture) const {
    const Annulus& a = alloc.support[i];
    std::vector<double> xs(kKernelGridSize);
    std::vector<double> ys(kKernelGridSize);
    const double step = (a.outer - a.inner) / (kKernelGridSize - 1);
    for (int n = 0; n < kKernelGridSize; ++n) {
      const double x = (n == kKernelGridSize - 1) ? a.outer : a.inner + n * step;
      xs[n] = x;
      ys[n] = mixture ? mixture_factor(i, x, gamma_lin)
                      : interferer_factor(i, x, gamma_lin);
    }
    return SplineTable(std::move(xs), std::move(ys));
  }

  bool has_inter_population(int i) const {
    for (int p = 0; p < kSpreadingFactorCount; ++p) {
      if (mix_weight[i][p] > 0.0) return true;
    }
    return false;
  }
};

AnalyticEngine::AnalyticEngine(PhyConfig phy, CaptureThresholds thresholds,
                               AllocationSet alloc)
    : impl_(std::make_unique<Impl>()) {
  phy.validate();
  Impl& im = *impl_;
  im.phy = phy;
  im.thresholds = thresholds;
  im.alloc = alloc;
  im.timings = frame_airtimes(phy);
  im.c = snr_constant(phy);
  im.alpha = phy.path_loss_exponent;
  im.gamma_co = db_to_linear(thresholds.co_sf_db);
  for (const auto sf : SpreadingFactor::all()) {
    const int i = sf.index();
    im.gamma_snr[i] = db_to_linear(thresholds.row(sf).snr_db);
    im.gamma_inter[i] = db_to_linear(thresholds.row(sf).inter_sf_db);
  }
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    double total = 0.0;
    for (int p = 0; p < kSpreadingFactorCount; ++p) {
      if (p == i || im.alloc.fraction[p] <= 0.0) continue;
      const double w =
          (im.timings[p].airtime_s + im.timings[i].airtime_s) * im.alloc.fraction[p];
      im.mix_weight[i][p] = w;
      total += w;
    }
    if (total > 0.0) {
      for (auto& w : im.mix_weight[i]) w /= total;
    }
  }
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    const Annulus& a = im.alloc.support[i];
    const auto integrand = [&](double r) {
      return im.signal_weight(i, im.gamma_snr[i], r);
    };
    const auto res = integrate(integrand, a.inner, a.outer, kQuadratureTol);
    im.coverage[i] = res.value;
    im.coverage_error[i] = res.abs_error;
  }
  im.kernel_co.reserve(kSpreadingFactorCount);
  im.kernel_inter.reserve(kSpreadingFactorCount);
  im.kernel_inter_co.reserve(kSpreadingFactorCount);
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    im.kernel_co.push_back(im.tabulate(i, im.gamma_co, false));
    if (im.has_inter_population(i)) {
      im.kernel_inter.push_back(im.tabulate(i, im.gamma_inter[i], true));
      im.kernel_inter_co.push_back(im.tabulate(i, im.gamma_co, true));
    } else {
      // Degenerate cell without other SFs: the inter-SF terms never fire.
      const Annulus& a = im.alloc.support[i];
      std::vector<double> xs = {a.inner, a.inner + (a.outer - a.inner) / 3,
                                a.inner + 2 * (a.outer - a.inner) / 3, a.outer};
      std::vector<double> ys(4, 1.0);
      im.kernel_inter.emplace_back(std::vector<double>(xs), std::vector<double>(ys));
      im.kernel_inter_co.emplace_back(std::move(xs), std::move(ys));
    }
  }
}

AnalyticEngine::AnalyticEngine(AnalyticEngine&&) noexcept = default;
AnalyticEngine& AnalyticEngine::operator=(AnalyticEngine&&) noexcept = default;
AnalyticEngine::~AnalyticEngine() = default;

const PhyConfig& AnalyticEngine::phy() const { return impl_->phy; }
const AllocationSet& AnalyticEngine::allocation() const { return impl_->alloc; }
const CaptureThresholds& AnalyticEngine::thresholds() const {
  return impl_->thresholds;
}
const std::array<FrameTiming, kSpreadingFactorCount>& AnalyticEngine::timings() const {
  return impl_->timings;
}
double AnalyticEngine::snr_constant_c() const { return impl_->c; }

double AnalyticEngine::co_sf_load(SpreadingFactor sf, double tau_s,
                                  double channel_rate_hz) const {
  const int i = sf.index();
  return (impl_->timings[i].airtime_s + tau_s) * channel_rate_hz *
         impl_->alloc.fraction[i];
}

double AnalyticEngine::inter_sf_load(SpreadingFactor sf, double tau_s,
                                     double channel_rate_hz) const {
  double acc = 0.0;
  for (int p = 0; p < kSpreadingFactorCount; ++p) {
    if (p == sf.index()) continue;
    acc += (impl_->timings[p].airtime_s + tau_s) * channel_rate_hz *
           impl_->alloc.fraction[p];
  }
  return acc;
}

double AnalyticEngine::no_collision_probability(SpreadingFactor sf,
                                                double channel_rate_hz) const {
  const double tau = impl_->timings[sf.index()].airtime_s;
  return std::exp(-(co_sf_load(sf, tau, channel_rate_hz) +
                    inter_sf_load(sf, tau, channel_rate_hz)));
}

double AnalyticEngine::coverage_probability(SpreadingFactor sf) const {
  return impl_->coverage[sf.index()];
}

double AnalyticEngine::capture_co(SpreadingFactor sf, int k_co) const {
  if (k_co < 0) throw std::invalid_argument("k_co must be >= 0");
  const Impl& im = *impl_;
  const int i = sf.index();
  const Annulus& a = im.alloc.support[i];
  const SplineTable& kernel = im.kernel_co[i];
  const auto f = [&](double r) {
    return im.signal_weight(i, im.gamma_co, r) * std::pow(kernel(r), k_co);
  };
  return integrate(f, a.inner, a.outer, kQuadratureTol).value;
}

double AnalyticEngine::capture_inter(SpreadingFactor sf, int k_int) const {
  if (k_int < 0) throw std::invalid_argument("k_int must be >= 0");
  const Impl& im = *impl_;
  const int i = sf.index();
  const Annulus& a = im.alloc.support[i];
  const SplineTable& kernel = im.kernel_inter[i];
  const auto f = [&](double r) {
    return im.signal_weight(i, im.gamma_inter[i], r) * std::pow(kernel(r), k_int);
  };
  return integrate(f, a.inner, a.outer, kQuadratureTol).value;
}

double AnalyticEngine::capture_co_inter(SpreadingFactor sf, int k_co,
                                        int k_int) const {
  if (k_co < 0 || k_int < 0) throw std::invalid_argument("k must be >= 0");
  const Impl& im = *impl_;
  const int i = sf.index();
  const Annulus& a = im.alloc.support[i];
  const SplineTable& co = im.kernel_co[i];
  const SplineTable& inter = im.kernel_inter_co[i];
  const auto f = [&](double r) {
    return im.signal_weight(i, im.gamma_co, r) * std::pow(co(r), k_co) *
           std::pow(inter(r), k_int);
  };
  return integrate(f, a.inner, a.outer, kQuadratureTol).value;
}

AnalyticEngine::CaptureBreakdown AnalyticEngine::frame_capture_breakdown(
    SpreadingFactor sf, double channel_rate_hz) const {
  if (channel_rate_hz < 0) throw std::invalid_argument("rate must be >= 0");
  const Impl& im = *impl_;
  const int i = sf.index();
  const Annulus& a = im.alloc.support[i];
  const double tau = im.timings[i].airtime_s;
  const double l_co = co_sf_load(sf, tau, channel_rate_hz);
  const double l_int = inter_sf_load(sf, tau, channel_rate_hz);

  const auto co = truncate_poisson(l_co, kPoissonTailEps, kPoissonTruncationCap);
  const auto inter = truncate_poisson(l_int, kPoissonTailEps, kPoissonTruncationCap);

  CaptureBreakdown out;
  out.co_truncation = co.order;
  out.inter_truncation = inter.order;
  out.discarded_mass = std::max(co.discarded, inter.discarded);
  out.no_collision = std::exp(-(l_co + l_int)) * im.coverage[i];
  double quad_error = im.coverage_error[i];

  // Each case sums P(k) * conditional capture over k >= 1. The Poisson
  // weights are folded into the integrand, which equals the truncated sum
  // of the per-k integrals by linearity of the quadrature.
  const SplineTable& kernel_co_tab = im.kernel_co[i];
  const SplineTable& kernel_int_tab = im.kernel_inter[i];
  const SplineTable& kernel_int_co_tab = im.kernel_inter_co[i];

  if (co.order > 0) {
    const auto f = [&](double r) {
      return im.signal_weight(i, im.gamma_co, r) *
             co.weighted_powers(kernel_co_tab(r));
    };
    const auto res = integrate(f, a.inner, a.outer, kQuadratureTol);
    out.co_only = std::exp(-l_int) * res.value;
    quad_error = std::max(quad_error, res.abs_error);
  }
  if (inter.order > 0) {
    const auto f = [&](double r) {
      return im.signal_weight(i, im.gamma_inter[i], r) *
             inter.weighted_powers(kernel_int_tab(r));
    };
    const auto res = integrate(f, a.inner, a.outer, kQuadratureTol);
    out.inter_only = std::exp(-l_co) * res.value;
    quad_error = std::max(quad_error, res.abs_error);
  }
  if (co.order > 0 && inter.order > 0) {
    const auto f = [&](double r) {
      return im.signal_weight(i, im.gamma_co, r) *
             co.weighted_powers(kernel_co_tab(r)) *
             inter.weighted_powers(kernel_int_co_tab(r));
    };
    const auto res = integrate(f, a.inner, a.outer, kQuadratureTol);
    out.both = res.value;
    quad_error = std::max(quad_error, res.abs_error);
  }
  out.quadrature_error = quad_error;
  out.total = out.no_collision + out.co_only + out.inter_only + out.both;
  return out;
}

double AnalyticEngine::frame_capture_probability(SpreadingFactor sf,
                                                 double channel_rate_hz) const {
  return frame_capture_breakdown(sf, channel_rate_hz).total;
}

AnalyticEngine::DropResult AnalyticEngine::frame_drop_probability(
    double aggregate_rate_hz) const {
  if (aggregate_rate_hz < 0) throw std::invalid_argument("rate must be >= 0");
  const Impl& im = *impl_;
  std::array<double, kSpreadingFactorCount> base{};
  double base_total = 0.0;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    base[i] = aggregate_rate_hz * im.alloc.fraction[i] * im.timings[i].airtime_s *
              im.coverage[i];
    base_total += base[i];
  }

  const auto map = [&](double fdp) {
    return 1.0 - poisson_cdf(kDemodulationPaths - 1, base_total * (1.0 - fdp));
  };

  DropResult out;
  double x = 0.0;
  double damping = 1.0;
  double prev_delta = 0.0;
  for (int it = 1; it <= kFixedPointCap; ++it) {
    const double delta = map(x) - x;
    out.diagnostics.iterations = it;
    out.diagnostics.residual = std::abs(delta);
    if (std::abs(delta) < kFixedPointTol) break;
    // The map is monotone decreasing in FDP, so plain iteration can
    // oscillate; halve the damping whenever the update changes sign.
    if (delta * prev_delta < 0.0) damping *= 0.5;
    prev_delta = delta;
    x = std::clamp(x + damping * delta, 0.0, 1.0);
  }
  out.diagnostics.converged = out.diagnostics.residual < kFixedPointTol;
  out.fdp = x;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    out.demod_load[i] = base[i] * (1.0 - x);
    out.demod_load_total += out.demod_load[i];
  }
  return out;
}

AnalyticReport AnalyticEngine::evaluate(double aggregate_rate_hz) const {
  const Impl& im = *impl_;
  AnalyticReport report;
  report.poisson_tail_eps = kPoissonTailEps;
  const double channel_rate = aggregate_rate_hz / im.phy.channel_count;
  report.loads.aggregate_rate_hz = aggregate_rate_hz;
  report.loads.channel_rate_hz = channel_rate;

  const auto drop = frame_drop_probability(aggregate_rate_hz);
  report.frame_drop = drop.fdp;
  report.fixed_point = drop.diagnostics;
  report.loads.demod_load = drop.demod_load;
  report.loads.demod_load_total = drop.demod_load_total;

  for (const auto sf : SpreadingFactor::all()) {
    const int i = sf.index();
    const double tau = im.timings[i].airtime_s;
    report.loads.co_sf_load[i] = co_sf_load(sf, tau, channel_rate);
    report.loads.inter_sf_load[i] = inter_sf_load(sf, tau, channel_rate);

    auto& metrics = report.per_sf[i];
    metrics.coverage = im.coverage[i];
    const auto breakdown = frame_capture_breakdown(sf, channel_rate);
    metrics.frame_capture = breakdown.total;
    metrics.frame_success = breakdown.total * (1.0 - drop.fdp);
    metrics.co_truncation = breakdown.co_truncation;
    metrics.inter_truncation = breakdown.inter_truncation;
    report.max_quadrature_error =
        std::max(report.max_quadrature_error, breakdown.quadrature_error);
    report.cell_coverage += im.alloc.fraction[i] * metrics.coverage;
    report.throughput_Bps += metrics.frame_success * im.alloc.fraction[i] *
                             aggregate_rate_hz * im.phy.payload_bytes;
  }
  return report;
}

}  // namespace loracell
