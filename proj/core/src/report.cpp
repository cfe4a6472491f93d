#include "loracell/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace loracell {

namespace {

// Shortest representation that parses back to the same double.
std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& field) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double v = std::stod(field, &pos);
  if (pos != field.size()) throw std::runtime_error("malformed number: " + field);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

}  // namespace

std::string result_csv_header() {
  std::string header = "sweep,sweep_axis,scheme,engine,fdp,fdp_se,coverage,"
                       "coverage_se,throughput_Bps,throughput_se";
  for (const char* metric : {"cp", "fcp", "fsp", "fcp_se"}) {
    for (int m = 7; m <= 12; ++m) {
      header += ',';
      header += metric;
      header += std::to_string(m);
    }
  }
  return header;
}

void write_result_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << result_csv_header() << '\n';
  for (const ResultRow& row : rows) {
    out << format_number(row.sweep_value) << ',' << to_string(row.sweep_axis) << ','
        << to_string(row.scheme) << ',' << to_string(row.engine) << ','
        << format_number(row.fdp) << ',' << format_number(row.fdp_se) << ','
        << format_number(row.coverage) << ',' << format_number(row.coverage_se)
        << ',' << format_number(row.throughput_Bps) << ','
        << format_number(row.throughput_se);
    for (const auto& metric : {row.cp, row.fcp, row.fsp, row.fcp_se}) {
      for (double v : metric) out << ',' << format_number(v);
    }
    out << '\n';
  }
}

void write_result_csv(const std::string& path, std::span<const ResultRow> rows) {
  auto out = open_or_throw(path);
  write_result_csv(out, rows);
}

std::vector<ResultRow> read_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty result CSV");
  if (line != result_csv_header()) {
    throw std::runtime_error("unexpected result CSV header: " + line);
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 34) {
      throw std::runtime_error("expected 34 CSV fields, got " +
                               std::to_string(fields.size()));
    }
    ResultRow row;
    std::size_t f = 0;
    row.sweep_value = parse_number(fields[f++]);
    row.sweep_axis =
        fields[f++] == "rate" ? SweepAxis::rate : SweepAxis::devices;
    row.scheme = scheme_from_string(fields[f++]);
    row.engine = engine_from_string(fields[f++]);
    row.fdp = parse_number(fields[f++]);
    row.fdp_se = parse_number(fields[f++]);
    row.coverage = parse_number(fields[f++]);
    row.coverage_se = parse_number(fields[f++]);
    row.throughput_Bps = parse_number(fields[f++]);
    row.throughput_se = parse_number(fields[f++]);
    for (auto* metric : {&row.cp, &row.fcp, &row.fsp, &row.fcp_se}) {
      for (double& v : *metric) v = parse_number(fields[f++]);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string trace_csv_header() {
  return "frame_id,device,sf,channel,start_s,airtime_s,fading,distance,"
         "covered,captured,detected,path_assigned,succeeded";
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << trace_csv_header() << '\n';
  for (const TraceRow& r : rows) {
    out << r.frame_id << ',' << r.device << ',' << r.sf << ',' << r.channel << ','
        << format_number(r.start_s) << ',' << format_number(r.airtime_s) << ','
        << format_number(r.fading_gain) << ',' << format_number(r.distance) << ','
        << int(r.covered) << ',' << int(r.captured) << ',' << int(r.detected)
        << ',' << int(r.path_assigned) << ',' << int(r.succeeded) << '\n';
  }
}

void write_trace_csv(const std::string& path, std::span<const TraceRow> rows) {
  auto out = open_or_throw(path);
  write_trace_csv(out, rows);
}

std::string allocation_to_json(std::span<const AllocationSet> allocations) {
  nlohmann::json root = nlohmann::json::array();
  for (const AllocationSet& alloc : allocations) {
    nlohmann::json entry;
    entry["scheme"] = to_string(alloc.scheme);
    entry["cell_radius"] = alloc.cell_radius;
    for (int m = 7; m <= 12; ++m) {
      const std::string key = "sf" + std::to_string(m);
      entry["fraction"][key] = alloc.fraction[m - 7];
      entry["border"][key] = alloc.border[m - 7];
      entry["support"][key] = {alloc.support[m - 7].inner,
                               alloc.support[m - 7].outer};
    }
    root.push_back(entry);
  }
  return root.dump(2);
}

void write_summary(std::ostream& out, std::span<const ResultRow> rows) {
  out << std::left << std::setw(10) << "sweep" << std::setw(10) << "scheme"
      << std::setw(10) << "engine" << std::right << std::setw(10) << "coverage"
      << std::setw(10) << "fdp" << std::setw(14) << "thrpt[B/s]" << std::setw(9)
      << "fcp7" << std::setw(9) << "fcp12" << '\n';
  for (const ResultRow& r : rows) {
    out << std::left << std::setw(10) << r.sweep_value << std::setw(10)
        << to_string(r.scheme) << std::setw(10) << to_string(r.engine)
        << std::right << std::fixed << std::setprecision(4) << std::setw(10)
        << r.coverage << std::setw(10) << r.fdp << std::setw(14) << std::setprecision(2)
        << r.throughput_Bps << std::setprecision(4) << std::setw(9) << r.fcp[0]
        << std::setw(9) << r.fcp[5] << '\n';
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
  }
}

std::vector<LowerBoundCheck> check_capture_lower_bound(
    std::span<const ResultRow> rows) {
  std::vector<LowerBoundCheck> checks;
  for (const ResultRow& analytic : rows) {
    if (analytic.engine != EngineKind::analytic) continue;
    for (const ResultRow& sim : rows) {
      if (sim.engine != EngineKind::simulate) continue;
      if (sim.scheme != analytic.scheme || sim.sweep_value != analytic.sweep_value)
        continue;
      for (int i = 0; i < kSpreadingFactorCount; ++i) {
        if (std::isnan(sim.fcp[i])) continue;  // no traffic observed for this SF
        LowerBoundCheck check;
        check.sweep_value = analytic.sweep_value;
        check.scheme = analytic.scheme;
        check.sf = i + 7;
        check.analytic_fcp = analytic.fcp[i];
        check.simulated_fcp = sim.fcp[i];
        check.simulated_se = std::isnan(sim.fcp_se[i]) ? 0.0 : sim.fcp_se[i];
        check.ok =
            check.analytic_fcp <= check.simulated_fcp + 3.0 * check.simulated_se;
        checks.push_back(check);
      }
    }
  }
  return checks;
}

}  // namespace loracell
