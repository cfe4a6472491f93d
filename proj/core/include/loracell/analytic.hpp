#pragma once

#include <array>
#include <memory>

#include "loracell/deployment.hpp"
#include "loracell/phy.hpp"

// Numerical evaluation of the uplink model: coverage and capture
// probability integrals under Rayleigh fading, Poisson interferer counts
// truncated to a documented tail mass, the demodulator-drop fixed point,
// and cell throughput.
//
// The engine is a pure evaluator: construction precomputes geometry and
// tabulates the interference kernels, after which every method is const and
// safe to call from multiple threads.

namespace loracell {

struct LoadModel {
  double aggregate_rate_hz = 0.0;  // lambda over all channels
  double channel_rate_hz = 0.0;    // lambda seen by one channel
  // Loads over the window tau = T_f_m, per channel.
  std::array<double, kSpreadingFactorCount> co_sf_load{};
  std::array<double, kSpreadingFactorCount> inter_sf_load{};
  // Demodulator occupancy L_m at the converged drop probability (all channels).
  std::array<double, kSpreadingFactorCount> demod_load{};
  double demod_load_total = 0.0;  // L_M
};

struct FixedPointDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

struct SfMetrics {
  double coverage = 0.0;       // CP_m
  double frame_capture = 0.0;  // FCP_m
  double frame_success = 0.0;  // FSP_m = FCP_m * (1 - FDP)
  int co_truncation = 0;       // Poisson truncation orders used
  int inter_truncation = 0;
};

struct AnalyticReport {
  std::array<SfMetrics, kSpreadingFactorCount> per_sf{};
  double frame_drop = 0.0;      // FDP
  double cell_coverage = 0.0;   // sum_m delta_m * CP_m
  double throughput_Bps = 0.0;  // payload bytes per second, all channels
  LoadModel loads;
  FixedPointDiagnostics fixed_point;
  double max_quadrature_error = 0.0;
  double poisson_tail_eps = 0.0;
};

class AnalyticEngine {
 public:
  AnalyticEngine(PhyConfig phy, CaptureThresholds thresholds, AllocationSet alloc);
  AnalyticEngine(AnalyticEngine&&) noexcept;
  AnalyticEngine& operator=(AnalyticEngine&&) noexcept;
  ~AnalyticEngine();

  const PhyConfig& phy() const;
  const AllocationSet& allocation() const;
  const CaptureThresholds& thresholds() const;
  const std::array<FrameTiming, kSpreadingFactorCount>& timings() const;
  /// Link-budget constant c used in every SNR/SINR expression.
  double snr_constant_c() const;

  /// Interference loads over an observation window tau, per channel.
  double co_sf_load(SpreadingFactor sf, double tau_s, double channel_rate_hz) const;
  double inter_sf_load(SpreadingFactor sf, double tau_s, double channel_rate_hz) const;

  /// P(no co- or inter-SF transmission overlaps a frame of this SF).
  double no_collision_probability(SpreadingFactor sf, double channel_rate_hz) const;

  /// CP_m: P(SNR > Gamma_m) for a device drawn from g_m.
  double coverage_probability(SpreadingFactor sf) const;

  /// Capture probability conditioned on exactly k_co co-SF interferers.
  double capture_co(SpreadingFactor sf, int k_co) const;
  /// Conditioned on exactly k_int inter-SF interferers (no co-SF ones).
  double capture_inter(SpreadingFactor sf, int k_int) const;
  /// Conditioned on both interferer kinds; the binding threshold is the
  /// co-SF one, which dominates every inter-SF threshold.
  double capture_co_inter(SpreadingFactor sf, int k_co, int k_int) const;

  struct CaptureBreakdown {
    double no_collision = 0.0;  // P(no collision) * CP_m
    double co_only = 0.0;
    double inter_only = 0.0;
    double both = 0.0;
    double total = 0.0;  // FCP_m
    int co_truncation = 0;
    int inter_truncation = 0;
    double discarded_mass = 0.0;  // Poisson tail excluded by truncation
    double quadrature_error = 0.0;
  };

  /// FCP_m: the capture-case sum evaluated over the window tau = T_f_m.
  CaptureBreakdown frame_capture_breakdown(SpreadingFactor sf,
                                           double channel_rate_hz) const;
  double frame_capture_probability(SpreadingFactor sf, double channel_rate_hz) const;

  struct DropResult {
    double fdp = 0.0;
    std::array<double, kSpreadingFactorCount> demod_load{};
    double demod_load_total = 0.0;
    FixedPointDiagnostics diagnostics;
  };

  /// Solves FDP = 1 - P(Poisson(L_M) <= paths-1) with
  /// L_M = sum_m lambda * delta_m * T_f_m * CP_m * (1 - FDP); the aggregate
  /// rate covers all channels since they share the demodulation paths.
  DropResult frame_drop_probability(double aggregate_rate_hz) const;

  /// Full report for one load point. Capture terms use the per-channel rate
  /// aggregate_rate_hz / channel_count; the drop fixed point uses the
  /// aggregate itself.
  AnalyticReport evaluate(double aggregate_rate_hz) const;

  static constexpr int kDemodulationPaths = 8;
  static constexpr double kPoissonTailEps = 1e-9;
  static constexpr int kPoissonTruncationCap = 200;
  static constexpr int kKernelGridSize = 2048;
  static constexpr double kQuadratureTol = 1e-10;
  static constexpr double kFixedPointTol = 1e-12;
  static constexpr int kFixedPointCap = 10000;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace loracell
