#include "loracell/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace loracell {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& context,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw ConfigError("unknown key '" + context + item.key() + "'");
    }
  }
}

template <typename T>
void read_field(const json& obj, const std::string& context, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError("invalid value for '" + context + key + "'");
  }
}

FadingModel fading_from_string(const std::string& name) {
  if (name == "block") return FadingModel::block;
  if (name == "per_symbol") return FadingModel::per_symbol;
  if (name == "none") return FadingModel::none;
  throw ConfigError("unknown fading model: " + name);
}

void parse_phy(const json& obj, PhyConfig& phy) {
  expect_keys(obj, "phy.",
              {"bandwidth_hz", "coding_rate", "preamble_symbols", "payload_bytes",
               "tx_power_dbm", "carrier_freq_ghz", "path_loss_exponent",
               "cell_radius", "channel_count", "duty_cycle"});
  read_field(obj, "phy.", "bandwidth_hz", phy.bandwidth_hz);
  read_field(obj, "phy.", "coding_rate", phy.coding_rate);
  read_field(obj, "phy.", "preamble_symbols", phy.preamble_symbols);
  read_field(obj, "phy.", "payload_bytes", phy.payload_bytes);
  read_field(obj, "phy.", "tx_power_dbm", phy.tx_power_dbm);
  read_field(obj, "phy.", "carrier_freq_ghz", phy.carrier_freq_ghz);
  read_field(obj, "phy.", "path_loss_exponent", phy.path_loss_exponent);
  read_field(obj, "phy.", "cell_radius", phy.cell_radius);
  read_field(obj, "phy.", "channel_count", phy.channel_count);
  read_field(obj, "phy.", "duty_cycle", phy.duty_cycle);
}

void parse_traffic(const json& obj, TrafficConfig& traffic) {
  expect_keys(obj, "traffic.", {"device_rate_hz", "rate_scope", "sweep"});
  read_field(obj, "traffic.", "device_rate_hz", traffic.device_rate_hz);
  if (obj.contains("rate_scope")) {
    const auto scope = obj.at("rate_scope").get<std::string>();
    if (scope == "total") {
      traffic.rate_scope = RateScope::total;
    } else if (scope == "per_channel") {
      traffic.rate_scope = RateScope::per_channel;
    } else {
      throw ConfigError("unknown rate_scope: " + scope);
    }
  }
  if (obj.contains("sweep")) {
    const json& sweep = obj.at("sweep");
    expect_keys(sweep, "traffic.sweep.", {"axis", "from", "to", "step", "values"});
    if (sweep.contains("axis")) {
      const auto axis = sweep.at("axis").get<std::string>();
      if (axis == "devices") {
        traffic.sweep.axis = SweepAxis::devices;
      } else if (axis == "rate") {
        traffic.sweep.axis = SweepAxis::rate;
      } else {
        throw ConfigError("unknown sweep axis: " + axis);
      }
    }
    read_field(sweep, "traffic.sweep.", "from", traffic.sweep.from);
    read_field(sweep, "traffic.sweep.", "to", traffic.sweep.to);
    read_field(sweep, "traffic.sweep.", "step", traffic.sweep.step);
    read_field(sweep, "traffic.sweep.", "values", traffic.sweep.values);
  }
}

void parse_sim(const json& obj, SimControls& sim) {
  expect_keys(obj, "sim.",
              {"duration_s", "replications", "seed", "fading", "threads"});
  read_field(obj, "sim.", "duration_s", sim.duration_s);
  read_field(obj, "sim.", "replications", sim.replications);
  read_field(obj, "sim.", "seed", sim.seed);
  if (obj.contains("fading")) {
    sim.fading = fading_from_string(obj.at("fading").get<std::string>());
  }
  read_field(obj, "sim.", "threads", sim.threads);
}

void parse_output(const json& obj, OutputConfig& output) {
  expect_keys(obj, "output.", {"csv", "summary", "allocation_json", "trace_csv"});
  read_field(obj, "output.", "csv", output.csv);
  read_field(obj, "output.", "summary", output.summary);
  read_field(obj, "output.", "allocation_json", output.allocation_json);
  read_field(obj, "output.", "trace_csv", output.trace_csv);
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(),
                            text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::analytic: return "analytic";
    case EngineKind::simulate: return "simulate";
    case EngineKind::both: return "both";
  }
  return "?";
}

EngineKind engine_from_string(const std::string& name) {
  if (name == "analytic") return EngineKind::analytic;
  if (name == "simulate") return EngineKind::simulate;
  if (name == "both") return EngineKind::both;
  throw ConfigError("unknown engine: " + name);
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::devices ? "devices" : "rate";
}

std::vector<double> SweepSpec::points() const {
  if (!values.empty()) return values;
  std::vector<double> out;
  for (double v = from; v <= to + 1e-9 * std::abs(step); v += step) {
    out.push_back(v);
  }
  return out;
}

double TrafficConfig::total_device_rate(int channel_count) const {
  return rate_scope == RateScope::total ? device_rate_hz
                                        : device_rate_hz * channel_count;
}

void ExperimentConfig::validate() const {
  try {
    phy.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("phy: ") + err.what());
  }
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (!(traffic.device_rate_hz > 0)) {
    throw ConfigError("traffic.device_rate_hz must be > 0");
  }
  if (traffic.sweep.values.empty()) {
    if (!(traffic.sweep.step > 0)) {
      throw ConfigError("traffic.sweep.step must be > 0");
    }
    if (traffic.sweep.from > traffic.sweep.to) {
      throw ConfigError("traffic.sweep.from must be <= traffic.sweep.to");
    }
  }
  for (double v : traffic.sweep.points()) {
    if (v < 0) throw ConfigError("sweep values must be >= 0");
  }
  if (sim.replications < 1) throw ConfigError("sim.replications must be >= 1");
  if (sim.duration_s < 0) throw ConfigError("sim.duration_s must be >= 0");
  if (sim.threads < 0) throw ConfigError("sim.threads must be >= 0");

  // Duty-cycle feasibility: the per-device rate must stay below DC / T_f
  // for every SF the chosen schemes populate.
  const double rate = traffic.total_device_rate(phy.channel_count);
  const auto timings = frame_airtimes(phy);
  for (const Scheme scheme : schemes) {
    const AllocationSet alloc = make_allocation(scheme, phy, thresholds);
    for (int i = 0; i < kSpreadingFactorCount; ++i) {
      if (alloc.fraction[i] <= 0) continue;
      const double cap = max_device_rate(timings[i].airtime_s, phy.duty_cycle);
      if (rate >= cap) {
        std::ostringstream msg;
        msg << "traffic.device_rate_hz: duty-cycle violation for SF" << (i + 7)
            << " under scheme " << to_string(scheme) << " (rate " << rate
            << "/s >= cap " << cap << "/s)";
        throw ConfigError(msg.str());
      }
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  const bool blank =
      std::all_of(text.begin(), text.end(),
                  [](unsigned char ch) { return std::isspace(ch) != 0; });
  if (blank) return config;

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError("config parse error at line " +
                      std::to_string(line_of_byte(text, err.byte)) + ": " +
                      err.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  expect_keys(root, "", {"phy", "schemes", "engine", "traffic", "sim", "output"});
  if (root.contains("phy")) parse_phy(root.at("phy"), config.phy);
  if (root.contains("schemes")) {
    config.schemes.clear();
    for (const auto& name : root.at("schemes")) {
      try {
        config.schemes.push_back(scheme_from_string(name.get<std::string>()));
      } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
      }
    }
  }
  if (root.contains("engine")) {
    config.engine = engine_from_string(root.at("engine").get<std::string>());
  }
  if (root.contains("traffic")) parse_traffic(root.at("traffic"), config.traffic);
  if (root.contains("sim")) parse_sim(root.at("sim"), config.sim);
  if (root.contains("output")) parse_output(root.at("output"), config.output);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = parse_config(buffer.str());
  config.validate();
  return config;
}

}  // namespace loracell
