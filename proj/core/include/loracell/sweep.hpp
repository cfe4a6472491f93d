#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "loracell/config.hpp"
#include "loracell/report.hpp"

// Experiment orchestration: runs the selected engine(s) over every
// (sweep value, scheme) pair and assembles rows, comparison checks and
// per-point failures. Re-running with the same config reproduces the output
// files byte-identically.

namespace loracell {

struct SweepOutcome {
  std::vector<ResultRow> rows;
  std::vector<LowerBoundCheck> comparisons;  // filled when both engines run
  std::vector<std::string> errors;           // failed points, flagged per point
  std::vector<TraceRow> trace;               // filled when a trace CSV is requested

  bool comparisons_ok() const;
};

SweepOutcome run_sweep(const ExperimentConfig& config);

/// Writes the configured outputs (CSV, allocation audit, trace, summary) and
/// the comparison block. Returns the process exit code: 0 on success,
/// 1 when a comparison assertion or sweep point failed.
int emit_report(const SweepOutcome& outcome, const ExperimentConfig& config,
                std::ostream& log);

}  // namespace loracell
