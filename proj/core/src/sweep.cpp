#include "loracell/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "loracell/analytic.hpp"

namespace loracell {

namespace {

struct Point {
  int scheme_index = 0;
  double sweep_value = 0.0;
};

ResultRow analytic_row(const AnalyticEngine& engine, const ExperimentConfig& config,
                       Scheme scheme, double sweep_value, double aggregate_rate) {
  const AnalyticReport report = engine.evaluate(aggregate_rate);
  ResultRow row;
  row.sweep_value = sweep_value;
  row.sweep_axis = config.traffic.sweep.axis;
  row.scheme = scheme;
  row.engine = EngineKind::analytic;
  row.fdp = report.frame_drop;
  row.coverage = report.cell_coverage;
  row.throughput_Bps = report.throughput_Bps;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    row.cp[i] = report.per_sf[i].coverage;
    row.fcp[i] = report.per_sf[i].frame_capture;
    row.fsp[i] = report.per_sf[i].frame_success;
  }
  return row;
}

ResultRow simulated_row(const SimStats& stats, const ExperimentConfig& config,
                        Scheme scheme, double sweep_value) {
  ResultRow row;
  row.sweep_value = sweep_value;
  row.sweep_axis = config.traffic.sweep.axis;
  row.scheme = scheme;
  row.engine = EngineKind::simulate;
  row.fdp = stats.fdp.value;
  row.fdp_se = stats.fdp.std_error;
  row.coverage = stats.cell_coverage.value;
  row.coverage_se = stats.cell_coverage.std_error;
  row.throughput_Bps = stats.throughput_Bps;
  row.throughput_se = stats.throughput_se;
  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    row.cp[i] = stats.cp[i].value;
    row.fcp[i] = stats.fcp[i].value;
    row.fsp[i] = stats.fsp[i].value;
    row.fcp_se[i] = stats.fcp[i].std_error;
  }
  return row;
}

int device_count_for(const ExperimentConfig& config, double sweep_value) {
  if (config.traffic.sweep.axis == SweepAxis::devices) {
    return static_cast<int>(std::llround(sweep_value));
  }
  const double rate = config.traffic.total_device_rate(config.phy.channel_count);
  return static_cast<int>(std::llround(sweep_value / rate));
}

double aggregate_rate_for(const ExperimentConfig& config, double sweep_value) {
  if (config.traffic.sweep.axis == SweepAxis::rate) return sweep_value;
  return sweep_value * config.traffic.total_device_rate(config.phy.channel_count);
}

}  // namespace

bool SweepOutcome::comparisons_ok() const {
  for (const auto& check : comparisons) {
    if (!check.ok) return false;
  }
  return true;
}

SweepOutcome run_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto points = config.traffic.sweep.points();
  const bool wants_analytic = config.engine != EngineKind::simulate;
  const bool wants_sim = config.engine != EngineKind::analytic;

  std::vector<AllocationSet> allocations;
  std::vector<AnalyticEngine> engines;
  allocations.reserve(config.schemes.size());
  for (const Scheme scheme : config.schemes) {
    allocations.push_back(make_allocation(scheme, config.phy, config.thresholds));
    if (wants_analytic) {
      engines.emplace_back(config.phy, config.thresholds, allocations.back());
    }
  }

  std::vector<Point> grid;
  for (std::size_t s = 0; s < config.schemes.size(); ++s) {
    for (const double v : points) grid.push_back({static_cast<int>(s), v});
  }

  // Rows are assembled per grid slot so output order is deterministic
  // regardless of how the work is scheduled.
  std::vector<std::vector<ResultRow>> slot_rows(grid.size());
  std::vector<std::vector<TraceRow>> slot_traces(grid.size());
  std::vector<std::string> slot_errors(grid.size());

  const auto eval_point = [&](std::size_t slot) {
    const Point& pt = grid[slot];
    const Scheme scheme = config.schemes[pt.scheme_index];
    try {
      const double aggregate = aggregate_rate_for(config, pt.sweep_value);
      if (wants_analytic) {
        slot_rows[slot].push_back(analytic_row(engines[pt.scheme_index], config,
                                               scheme, pt.sweep_value, aggregate));
      }
      if (wants_sim) {
        SimConfig sim;
        sim.devices = device_count_for(config, pt.sweep_value);
        sim.device_rate_hz =
            config.traffic.total_device_rate(config.phy.channel_count);
        sim.duration_s = config.sim.duration_s;
        sim.replications = config.sim.replications;
        sim.seed = config.sim.seed;
        sim.fading = config.sim.fading;
        sim.threads = config.sim.threads;
        sim.collect_trace = !config.output.trace_csv.empty();
        SimStats stats = run_simulation(allocations[pt.scheme_index], config.phy,
                                        config.thresholds, sim);
        slot_rows[slot].push_back(
            simulated_row(stats, config, scheme, pt.sweep_value));
        if (sim.collect_trace) slot_traces[slot] = std::move(stats.trace);
      }
    } catch (const std::exception& err) {
      std::ostringstream msg;
      msg << "scheme=" << to_string(scheme) << " sweep=" << pt.sweep_value << ": "
          << err.what();
      slot_errors[slot] = msg.str();
    }
  };

  // Simulation points saturate the cores internally; analytic-only sweeps
  // parallelize across points.
  if (wants_sim) {
    for (std::size_t slot = 0; slot < grid.size(); ++slot) eval_point(slot);
  } else {
    unsigned workers = std::thread::hardware_concurrency();
    if (config.sim.threads > 0) workers = config.sim.threads;
    workers = std::max(1u, std::min<unsigned>(workers, grid.size()));
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
      for (;;) {
        const std::size_t slot = next.fetch_add(1);
        if (slot >= grid.size()) return;
        eval_point(slot);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(drain);
    drain();
    for (auto& t : pool) t.join();
  }

  SweepOutcome outcome;
  for (std::size_t slot = 0; slot < grid.size(); ++slot) {
    for (const ResultRow& row : slot_rows[slot]) outcome.rows.push_back(row);
    for (const TraceRow& row : slot_traces[slot]) outcome.trace.push_back(row);
    if (!slot_errors[slot].empty()) outcome.errors.push_back(slot_errors[slot]);
  }
  if (wants_analytic && wants_sim) {
    outcome.comparisons = check_capture_lower_bound(outcome.rows);
  }
  return outcome;
}

int emit_report(const SweepOutcome& outcome, const ExperimentConfig& config,
                std::ostream& log) {
  if (!config.output.csv.empty()) {
    write_result_csv(config.output.csv, outcome.rows);
    log << "wrote " << outcome.rows.size() << " rows to " << config.output.csv
        << '\n';
  }
  if (!config.output.allocation_json.empty()) {
    std::vector<AllocationSet> allocations;
    for (const Scheme scheme : config.schemes) {
      allocations.push_back(make_allocation(scheme, config.phy, config.thresholds));
    }
    std::ofstream out(config.output.allocation_json);
    if (!out) {
      log << "cannot write " << config.output.allocation_json << '\n';
      return 1;
    }
    out << allocation_to_json(allocations) << '\n';
    log << "wrote allocation audit to " << config.output.allocation_json << '\n';
  }
  if (!config.output.trace_csv.empty()) {
    write_trace_csv(config.output.trace_csv, outcome.trace);
    log << "wrote " << outcome.trace.size() << " trace records to "
        << config.output.trace_csv << '\n';
  }
  if (config.output.summary) write_summary(log, outcome.rows);

  int exit_code = 0;
  if (!outcome.comparisons.empty()) {
    std::size_t failed = 0;
    for (const auto& check : outcome.comparisons) {
      if (!check.ok) {
        ++failed;
        log << "LOWER-BOUND VIOLATION: scheme=" << to_string(check.scheme)
            << " sweep=" << check.sweep_value << " SF" << check.sf
            << " analytic=" << check.analytic_fcp
            << " simulated=" << check.simulated_fcp << " (3se margin "
            << 3.0 * check.simulated_se << ")\n";
      }
    }
    log << "lower-bound comparison: " << (outcome.comparisons.size() - failed)
        << "/" << outcome.comparisons.size() << " checks passed\n";
    if (failed > 0) exit_code = 1;
  }
  for (const std::string& err : outcome.errors) {
    log << "FAILED POINT: " << err << '\n';
    exit_code = 1;
  }
  return exit_code;
}

}  // namespace loracell
