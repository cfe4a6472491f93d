#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "loracell/config.hpp"
#include "loracell/deployment.hpp"
#include "loracell/sim.hpp"

// Result rows and their serializations. The CSV layout is fixed: one row
// per (sweep value, scheme, engine), numbers printed with 17 significant
// digits so rewriting the same results is byte-identical and parsing them
// back round-trips exactly. Standard-error columns are empty for analytic
// rows.

namespace loracell {

struct ResultRow {
  double sweep_value = 0.0;
  SweepAxis sweep_axis = SweepAxis::devices;
  Scheme scheme = Scheme::distance;
  EngineKind engine = EngineKind::analytic;  // analytic or simulate
  double fdp = 0.0;
  double fdp_se = std::numeric_limits<double>::quiet_NaN();
  double coverage = 0.0;
  double coverage_se = std::numeric_limits<double>::quiet_NaN();
  double throughput_Bps = 0.0;
  double throughput_se = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kSpreadingFactorCount> cp{};
  std::array<double, kSpreadingFactorCount> fcp{};
  std::array<double, kSpreadingFactorCount> fsp{};
  std::array<double, kSpreadingFactorCount> fcp_se{};

  ResultRow() { fcp_se.fill(std::numeric_limits<double>::quiet_NaN()); }
};

/// The fixed CSV column list (also the documented interface).
std::string result_csv_header();

void write_result_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_result_csv(const std::string& path, std::span<const ResultRow> rows);

/// Parses a CSV produced by write_result_csv. Throws std::runtime_error on
/// header mismatch or malformed rows.
std::vector<ResultRow> read_result_csv(std::istream& in);

/// Frame-level simulator trace (fixed column order, one record per frame).
std::string trace_csv_header();
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);
void write_trace_csv(const std::string& path, std::span<const TraceRow> rows);

/// Scheme tag, delta table and border table for audit.
std::string allocation_to_json(std::span<const AllocationSet> allocations);

/// Human-readable per-row digest.
void write_summary(std::ostream& out, std::span<const ResultRow> rows);

/// One analytic-vs-simulated check: the analytic capture probability must
/// not exceed the simulated one by more than 3 standard errors.
struct LowerBoundCheck {
  double sweep_value = 0.0;
  Scheme scheme = Scheme::distance;
  int sf = 7;
  double analytic_fcp = 0.0;
  double simulated_fcp = 0.0;
  double simulated_se = 0.0;
  bool ok = false;
};

/// Pairs analytic and simulated rows by (sweep value, scheme) and checks the
/// lower-bound property for every SF with simulated traffic.
std::vector<LowerBoundCheck> check_capture_lower_bound(std::span<const ResultRow> rows);

}  // namespace loracell
