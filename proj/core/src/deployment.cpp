#include "loracell/deployment.hpp"

#include <cmath>
#include <stdexcept>

#include "loracell/units.hpp"

namespace loracell {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::uniform: return "uniform";
    case Scheme::distance: return "distance";
    case Scheme::eqload: return "eqload";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "uniform") return Scheme::uniform;
  if (name == "distance") return Scheme::distance;
  if (name == "eqload") return Scheme::eqload;
  throw std::invalid_argument("unknown allocation scheme: " + name);
}

double cell_pdf(double r, double cell_radius) {
  if (r < 0 || r > cell_radius) return 0.0;
  return 2.0 * r / (cell_radius * cell_radius);
}

double AllocationSet::pdf(SpreadingFactor sf, double r) const {
  const Annulus& a = support[sf.index()];
  if (!a.contains(r)) return 0.0;
  return 2.0 * r / (a.outer * a.outer - a.inner * a.inner);
}

double AllocationSet::cdf(SpreadingFactor sf, double r) const {
  const Annulus& a = support[sf.index()];
  if (r <= a.inner) return 0.0;
  if (r >= a.outer) return 1.0;
  return (r * r - a.inner * a.inner) / (a.outer * a.outer - a.inner * a.inner);
}

double AllocationSet::radius_from_cdf(SpreadingFactor sf, double u) const {
  const Annulus& a = support[sf.index()];
  return std::sqrt(a.inner * a.inner + u * (a.outer * a.outer - a.inner * a.inner));
}

double sensitivity_range(const PhyConfig& phy, double sensitivity_dbm) {
  if (!(phy.path_loss_exponent > 0)) {
    throw std::invalid_argument("path_loss_exponent must be > 0");
  }
  const double p0 = db_to_linear(phy.tx_power_dbm);
  const double gain = path_gain_constant(phy.carrier_freq_ghz);
  const double theta = db_to_linear(sensitivity_dbm);
  return std::pow(p0 * gain / theta, 1.0 / phy.path_loss_exponent);
}

double resolved_cell_radius(const PhyConfig& phy, const CaptureThresholds& thresholds) {
  if (phy.cell_radius > 0) return phy.cell_radius;
  return sensitivity_range(phy, thresholds.rows.back().sensitivity_dbm);
}

AllocationSet uniform_allocation(double cell_radius) {
  if (!(cell_radius > 0)) throw std::invalid_argument("cell_radius must be > 0");
  AllocationSet out;
  out.scheme = Scheme::uniform;
  out.cell_radius = cell_radius;
  out.fraction.fill(1.0 / kSpreadingFactorCount);
  out.border.fill(cell_radius);
  out.support.fill(Annulus{0.0, cell_radius});
  return out;
}

namespace {

// Shared by the distance and eqload schemes: sensitivity borders rescaled
// so the SF12 border lands on the cell radius.
std::array<double, kSpreadingFactorCount> scaled_borders(
    const PhyConfig& phy, const CaptureThresholds& thresholds, double cell_radius) {
  std::array<double, kSpreadingFactorCount> raw{};
  for (const auto sf : SpreadingFactor::all()) {
    raw[sf.index()] = sensitivity_range(phy, thresholds.row(sf).sensitivity_dbm);
  }
  const double scale = cell_radius / raw.back();
  for (auto& l : raw) l *= scale;
  return raw;
}

void fill_annuli(AllocationSet& alloc) {
  double inner = 0.0;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    alloc.support[i] = Annulus{inner, alloc.border[i]};
    inner = alloc.border[i];
  }
}

}  // namespace

AllocationSet distance_allocation(const PhyConfig& phy, const CaptureThresholds& thresholds) {
  AllocationSet out;
  out.scheme = Scheme::distance;
  out.cell_radius = resolved_cell_radius(phy, thresholds);
  out.border = scaled_borders(phy, thresholds, out.cell_radius);
  fill_annuli(out);
  const double total_area = out.cell_radius * out.cell_radius;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    const Annulus& a = out.support[i];
    out.fraction[i] = (a.outer * a.outer - a.inner * a.inner) / total_area;
  }
  return out;
}

AllocationSet eqload_allocation(const PhyConfig& phy, const CaptureThresholds& thresholds) {
  AllocationSet out = distance_allocation(phy, thresholds);
  out.scheme = Scheme::eqload;
  const auto timings = frame_airtimes(phy);
  double total = 0.0;
  for (const auto& t : timings) total += 1.0 / t.airtime_s;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    out.fraction[i] = (1.0 / timings[i].airtime_s) / total;
  }
  return out;
}

AllocationSet make_allocation(Scheme scheme, const PhyConfig& phy,
                              const CaptureThresholds& thresholds) {
  switch (scheme) {
    case Scheme::uniform:
      return uniform_allocation(resolved_cell_radius(phy, thresholds));
    case Scheme::distance:
      return distance_allocation(phy, thresholds);
    case Scheme::eqload:
      return eqload_allocation(phy, thresholds);
  }
  throw std::invalid_argument("unknown scheme");
}

AllocationSet single_sf_allocation(SpreadingFactor sf, double cell_radius) {
  AllocationSet out = uniform_allocation(cell_radius);
  out.fraction.fill(0.0);
  out.fraction[sf.index()] = 1.0;
  return out;
}

DevicePlacement sample_device(const AllocationSet& alloc, int device_id,
                              double arrival_rate_hz, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int chosen = kSpreadingFactorCount - 1;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    acc += alloc.fraction[i];
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  const SpreadingFactor sf(chosen + 7);
  return DevicePlacement{device_id, sf, alloc.radius_from_cdf(sf, rng.uniform()),
                         arrival_rate_hz};
}

}  // namespace loracell
