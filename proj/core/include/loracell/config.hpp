#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "loracell/deployment.hpp"
#include "loracell/phy.hpp"
#include "loracell/sim.hpp"

// Experiment configuration: a strict JSON file plus programmatic overrides.
// Unknown keys are rejected, defaults mirror the stock EU868 single-gateway
// setup (lambda_d = 1/600 s^-1, B = 50 bytes, N_c = 8, CR = 1, n_pre = 12).

namespace loracell {

enum class EngineKind { analytic, simulate, both };

std::string to_string(EngineKind kind);
EngineKind engine_from_string(const std::string& name);

enum class SweepAxis { devices, rate };

std::string to_string(SweepAxis axis);

enum class RateScope { total, per_channel };

struct SweepSpec {
  SweepAxis axis = SweepAxis::devices;
  double from = 250.0;
  double to = 4000.0;
  double step = 250.0;
  std::vector<double> values;  // when non-empty, overrides the range

  std::vector<double> points() const;
};

struct TrafficConfig {
  double device_rate_hz = 1.0 / 600.0;  // lambda_d
  RateScope rate_scope = RateScope::total;
  SweepSpec sweep;

  /// Per-device rate summed over channels, whatever the scope.
  double total_device_rate(int channel_count) const;
};

struct SimControls {
  double duration_s = 10000.0;
  int replications = 20;
  std::uint64_t seed = 1;
  FadingModel fading = FadingModel::block;
  int threads = 0;  // 0 -> hardware concurrency
};

struct OutputConfig {
  std::string csv;  // empty -> no CSV file
  bool summary = true;
  std::string allocation_json;  // audit dump of the allocation sets
  std::string trace_csv;        // per-frame simulator trace
};

struct ExperimentConfig {
  PhyConfig phy;
  std::vector<Scheme> schemes = {Scheme::distance};
  EngineKind engine = EngineKind::analytic;
  TrafficConfig traffic;
  SimControls sim;
  OutputConfig output;
  CaptureThresholds thresholds = CaptureThresholds::lora_defaults();

  /// Throws ConfigError; checks field ranges and that the device rate stays
  /// below the duty-cycle cap of every populated SF in every scheme.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse a config from JSON text. An empty (or whitespace-only) document
/// yields the defaults. Unknown keys and malformed values raise ConfigError
/// with the offending key or line.
ExperimentConfig parse_config(const std::string& text);

/// Load and validate a config file.
ExperimentConfig load_config(const std::string& path);

}  // namespace loracell
