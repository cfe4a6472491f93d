// Command line front end: analyze (analytic engine), simulate (Monte-Carlo
// engine) and compare (both engines plus the capture lower-bound check).
// Every number in the output is attributable to one engine call; identical
// configs and seeds reproduce the files byte-identically.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "loracell/config.hpp"
#include "loracell/sweep.hpp"

namespace {

using namespace loracell;

struct CliOverrides {
  std::string config_path;
  std::string out_csv;
  std::vector<std::string> schemes;
  std::string sweep;
  std::string trace_out;
  std::string dump_alloc;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replications = 0;
  double duration = 0;
  int threads = -1;
  bool no_summary = false;
};

SweepSpec parse_sweep_spec(const std::string& text) {
  SweepSpec sweep;
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ':')) parts.push_back(token);
  if (parts.empty()) throw ConfigError("empty --sweep specification");
  if (parts[0] == "devices") {
    sweep.axis = SweepAxis::devices;
  } else if (parts[0] == "rate") {
    sweep.axis = SweepAxis::rate;
  } else {
    throw ConfigError("--sweep axis must be 'devices' or 'rate'");
  }
  try {
    if (parts.size() == 2 && parts[1].find(',') != std::string::npos) {
      std::istringstream values(parts[1]);
      while (std::getline(values, token, ',')) {
        sweep.values.push_back(std::stod(token));
      }
    } else if (parts.size() == 2) {
      sweep.values.push_back(std::stod(parts[1]));
    } else if (parts.size() == 4) {
      sweep.from = std::stod(parts[1]);
      sweep.to = std::stod(parts[2]);
      sweep.step = std::stod(parts[3]);
    } else {
      throw ConfigError(
          "--sweep wants axis:from:to:step, axis:value or axis:v1,v2,...");
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("malformed number in --sweep: " + text);
  }
  return sweep;
}

ExperimentConfig assemble(const CliOverrides& cli, EngineKind engine) {
  ExperimentConfig config;
  if (!cli.config_path.empty()) {
    config = load_config(cli.config_path);
  }
  config.engine = engine;
  if (!cli.out_csv.empty()) config.output.csv = cli.out_csv;
  if (!cli.schemes.empty()) {
    config.schemes.clear();
    for (const auto& name : cli.schemes) {
      config.schemes.push_back(scheme_from_string(name));
    }
  }
  if (!cli.sweep.empty()) config.traffic.sweep = parse_sweep_spec(cli.sweep);
  if (cli.seed_set) config.sim.seed = cli.seed;
  if (cli.replications > 0) config.sim.replications = cli.replications;
  if (cli.duration > 0) config.sim.duration_s = cli.duration;
  if (cli.threads >= 0) config.sim.threads = cli.threads;
  if (!cli.trace_out.empty()) config.output.trace_csv = cli.trace_out;
  if (!cli.dump_alloc.empty()) config.output.allocation_json = cli.dump_alloc;
  if (cli.no_summary) config.output.summary = false;
  config.validate();
  return config;
}

void add_common_options(CLI::App* cmd, CliOverrides& cli) {
  cmd->add_option("-c,--config", cli.config_path, "experiment config (JSON)");
  cmd->add_option("-o,--out", cli.out_csv, "results CSV path");
  cmd->add_option("--scheme", cli.schemes,
                  "allocation scheme(s): uniform, distance, eqload");
  cmd->add_option("--sweep", cli.sweep,
                  "sweep spec: axis:from:to:step or axis:v1,v2,... "
                  "(axis: devices|rate)");
  cmd->add_option("--seed", cli.seed, "simulation master seed")
      ->each([&cli](const std::string&) { cli.seed_set = true; });
  cmd->add_option("--replications", cli.replications, "simulation replications");
  cmd->add_option("--duration", cli.duration, "simulated seconds per replication");
  cmd->add_option("--threads", cli.threads, "worker threads (0 = all cores)");
  cmd->add_option("--trace-out", cli.trace_out, "per-frame trace CSV (simulation)");
  cmd->add_option("--dump-alloc", cli.dump_alloc, "allocation audit JSON path");
  cmd->add_flag("--no-summary", cli.no_summary, "suppress the summary table");
}

int run(const CliOverrides& cli, EngineKind engine) {
  const ExperimentConfig config = assemble(cli, engine);
  const SweepOutcome outcome = run_sweep(config);
  return emit_report(outcome, config, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN single-gateway uplink performance toolkit"};
  app.require_subcommand(1);

  CliOverrides cli;
  EngineKind engine = EngineKind::analytic;

  CLI::App* analyze =
      app.add_subcommand("analyze", "evaluate the analytic uplink model");
  add_common_options(analyze, cli);
  analyze->callback([&] { engine = EngineKind::analytic; });

  CLI::App* simulate =
      app.add_subcommand("simulate", "run the symbol-level Monte-Carlo simulator");
  add_common_options(simulate, cli);
  simulate->callback([&] { engine = EngineKind::simulate; });

  CLI::App* compare = app.add_subcommand(
      "compare", "run both engines and check the capture lower bound");
  add_common_options(compare, cli);
  compare->callback([&] { engine = EngineKind::both; });

  CLI11_PARSE(app, argc, argv);

  try {
    return run(cli, engine);
  } catch (const loracell::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}
