#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "loracell/deployment.hpp"
#include "loracell/phy.hpp"
#include "loracell/rng.hpp"
#include "loracell/stats.hpp"

// Symbol-granular Monte-Carlo simulator of the uplink: Poisson frame
// generation per device, per-symbol SINR capture evaluation, and an
// SX1301-style demodulator with 8 paths shared across all channels (the 48
// preamble detectors, one per SF/channel pair, never bottleneck and are not
// modeled as a resource).
//
// Every replication is an isolated single-threaded event loop driven by its
// own random stream; identical seeds reproduce results bit-for-bit.

namespace loracell {

enum class FadingModel {
  block,       // one |h|^2 draw per frame (default)
  per_symbol,  // independent draw per transmitter symbol (experiment knob)
  none,        // |h|^2 = 1
};

struct FrameEvent {
  std::int64_t id = 0;  // position in the time-ordered trace
  int device = 0;
  SpreadingFactor sf{7};
  int channel = 0;
  double start_s = 0.0;
  FrameTiming timing;
  double fading_gain = 1.0;  // |h|^2
  double distance = 0.0;
  std::uint64_t fading_seed = 0;  // per-symbol fading stream

  double end_s() const { return start_s + timing.airtime_s; }
};

/// Frames for `devices` devices over `duration_s`, time-ordered. Device
/// positions are sampled once and stay fixed for the whole run; per-device
/// inter-arrival times are exponential with mean 1/device_rate_hz and each
/// frame picks one of the N_c channels uniformly. Throws std::invalid_argument
/// when device_rate_hz is not below the duty-cycle cap of a device's SF.
std::vector<FrameEvent> generate_trace(const AllocationSet& alloc,
                                       const PhyConfig& phy, int devices,
                                       double device_rate_hz, double duration_s,
                                       Rng& rng, FadingModel fading = FadingModel::block,
                                       std::vector<DevicePlacement>* placements = nullptr);

struct CaptureOutcome {
  bool covered = false;   // SNR above Gamma_m on every symbol, interference aside
  bool captured = false;  // every symbol passed all applicable conditions
  bool detected = false;  // some run of 4 consecutive preamble symbols passed
  double detection_time_s = 0.0;  // end of that run, valid when detected
};

/// Per-symbol capture evaluation for one frame against its channel mates.
class CaptureEvaluator {
 public:
  CaptureEvaluator(const PhyConfig& phy, const CaptureThresholds& thresholds,
                   FadingModel fading = FadingModel::block);

  /// `overlapping` holds candidate interferers; entries on another channel
  /// or the frame itself are ignored. A frame interferes with a symbol as
  /// soon as it overlaps any part of the symbol interval.
  CaptureOutcome evaluate(const FrameEvent& frame,
                          std::span<const FrameEvent* const> overlapping) const;

 private:
  double own_gain(const FrameEvent& frame, int symbol) const;
  double interferer_gain(const FrameEvent& frame, double t0, double t1) const;

  CaptureThresholds thresholds_;
  FadingModel fading_;
  double alpha_;
  double inv_c_;  // equivalent noise power in path-gain units
  std::array<double, kSpreadingFactorCount> gamma_snr_lin_{};
  std::array<double, kSpreadingFactorCount> gamma_inter_lin_{};
  double gamma_co_lin_ = 0.0;
};

/// The 8 shared demodulation paths. A path is held from preamble detection
/// until the scheduled frame end, whether or not the frame stays captured.
class DemodulatorState {
 public:
  explicit DemodulatorState(int path_count = 8);

  /// Releases paths due at or before `now` (release before acquire on
  /// ties), then tries to claim a path until `release_s`.
  bool on_detection(double now, double release_s);

  int busy_paths() const { return static_cast<int>(release_times_.size()); }
  int path_count() const { return path_count_; }
  int max_busy_seen() const { return max_busy_seen_; }

 private:
  int path_count_;
  int max_busy_seen_ = 0;
  std::vector<double> release_times_;  // min-heap
};

struct DetectionEvent {
  double time_s = 0.0;
  std::int64_t frame_id = 0;
  double release_s = 0.0;
};

/// Processes detections in deterministic (time, frame id) order and returns
/// per-event path grants. Exposed separately so the demodulator contract is
/// testable on hand-built event streams.
std::vector<bool> assign_demodulation_paths(std::vector<DetectionEvent> detections,
                                            int path_count = 8,
                                            int* max_busy_seen = nullptr);

struct SfCounts {
  std::int64_t generated = 0;
  std::int64_t covered = 0;
  std::int64_t captured = 0;
  std::int64_t detected = 0;
  std::int64_t dropped_no_path = 0;
  std::int64_t succeeded = 0;

  SfCounts& operator+=(const SfCounts& other);
};

struct TraceRow {
  std::int64_t frame_id = 0;
  int device = 0;
  int sf = 0;
  int channel = 0;
  double start_s = 0.0;
  double airtime_s = 0.0;
  double fading_gain = 0.0;
  double distance = 0.0;
  bool covered = false;
  bool captured = false;
  bool detected = false;
  bool path_assigned = false;
  bool succeeded = false;
};

struct ReplicationResult {
  std::array<SfCounts, kSpreadingFactorCount> counts{};
  int max_busy_paths = 0;
  std::vector<TraceRow> trace;  // filled only when requested
};

struct SimConfig {
  int devices = 1000;
  double device_rate_hz = 1.0 / 600.0;  // lambda_d, per device over all channels
  double duration_s = 10000.0;
  int replications = 1;
  std::uint64_t seed = 1;
  FadingModel fading = FadingModel::block;
  bool collect_trace = false;
  int threads = 0;  // 0 -> hardware concurrency
};

ReplicationResult run_replication(const AllocationSet& alloc, const PhyConfig& phy,
                                  const CaptureThresholds& thresholds,
                                  const SimConfig& config, Rng rng);

/// A proportion estimated from pooled counts, with a Wilson interval on the
/// pool and a between-replication standard error of the mean.
struct Proportion {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  WilsonInterval wilson;
};

struct SimStats {
  std::array<SfCounts, kSpreadingFactorCount> counts{};  // pooled
  SfCounts total;
  std::array<Proportion, kSpreadingFactorCount> cp;   // covered / generated
  std::array<Proportion, kSpreadingFactorCount> fcp;  // captured / generated
  std::array<Proportion, kSpreadingFactorCount> fsp;  // succeeded / generated
  Proportion fdp;            // dropped_no_path / detected, all SFs
  Proportion cell_coverage;  // covered / generated, all SFs
  double throughput_Bps = 0.0;
  double throughput_se = std::numeric_limits<double>::quiet_NaN();
  int replications = 0;
  int max_busy_paths = 0;
  std::vector<TraceRow> trace;
};

/// Runs `replications` independent replications (streams derived from the
/// seed) in parallel and aggregates. Deterministic for a given config.
SimStats run_simulation(const AllocationSet& alloc, const PhyConfig& phy,
                        const CaptureThresholds& thresholds, const SimConfig& config);

}  // namespace loracell
