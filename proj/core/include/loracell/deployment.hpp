#pragma once

#include <array>
#include <string>

#include "loracell/phy.hpp"
#include "loracell/rng.hpp"

// Cell geometry and SF allocation. A scheme assigns every SF a population
// fraction delta_m and a radial density g_m. All three schemes (and the
// degenerate single-SF cell used in tests) share the same density family:
// uniform-by-area over an annulus, g_m(r) = 2r / (outer^2 - inner^2).

namespace loracell {

enum class Scheme { uniform, distance, eqload };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct Annulus {
  double inner = 0.0;
  double outer = 0.0;

  bool contains(double r) const { return r >= inner && r <= outer; }
  bool operator==(const Annulus&) const = default;
};

/// Distance pdf of a uniform deployment over a disc of radius R: 2r/R^2.
double cell_pdf(double r, double cell_radius);

struct AllocationSet {
  Scheme scheme = Scheme::uniform;
  double cell_radius = 0.0;
  std::array<double, kSpreadingFactorCount> fraction{};  // delta_m, sums to 1
  std::array<double, kSpreadingFactorCount> border{};    // l_m; border[5] == R
  std::array<Annulus, kSpreadingFactorCount> support{};  // support of g_m

  /// g_m(r): uniform-by-area density over the SF's support, 0 elsewhere.
  double pdf(SpreadingFactor sf, double r) const;
  double cdf(SpreadingFactor sf, double r) const;
  /// Inverse CDF; u in [0,1]. Used for sampling and closed-form checks.
  double radius_from_cdf(SpreadingFactor sf, double u) const;
};

/// Raw sensitivity range of an SF: (P0 * A(fc) / theta_RX)^(1/alpha).
double sensitivity_range(const PhyConfig& phy, double sensitivity_dbm);

/// Cell radius used when PhyConfig.cell_radius is 0: the raw SF12 range,
/// which makes the distance borders physically meaningful and leaves every
/// reported probability scale-free.
double resolved_cell_radius(const PhyConfig& phy, const CaptureThresholds& thresholds);

/// delta_m = 1/6, every SF deployed over the whole disc.
AllocationSet uniform_allocation(double cell_radius);

/// Annulus borders from the deterministic path loss and the per-SF
/// sensitivities, rescaled so l_12 = R; delta_m proportional to annulus area.
AllocationSet distance_allocation(const PhyConfig& phy, const CaptureThresholds& thresholds);

/// Same borders as distance_allocation; delta_m proportional to 1/T_f_m so
/// every SF carries the same traffic load. Device density stays uniform
/// within each annulus but differs across annuli.
AllocationSet eqload_allocation(const PhyConfig& phy, const CaptureThresholds& thresholds);

AllocationSet make_allocation(Scheme scheme, const PhyConfig& phy,
                              const CaptureThresholds& thresholds);

/// Degenerate cell with one SF over the whole disc (test/support scheme).
AllocationSet single_sf_allocation(SpreadingFactor sf, double cell_radius);

struct DevicePlacement {
  int device = 0;
  SpreadingFactor sf{7};
  double distance = 0.0;       // r, in the support of g_sf
  double arrival_rate_hz = 0;  // lambda_d
};

/// SF drawn with probability delta_m, distance by inverse CDF of g_m.
DevicePlacement sample_device(const AllocationSet& alloc, int device_id,
                              double arrival_rate_hz, Rng& rng);

}  // namespace loracell
