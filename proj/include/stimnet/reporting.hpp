#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stimnet/engine.hpp"

namespace stimnet {

// Per-iteration CSV log. Schema (LF line endings):
//   iteration,phase,source,stimulus_hex,response_hex,status,newly_hit,coverage
// stimulus/response are per-port hex joined by '|' in canonical port
// order, newly_hit is ';'-joined bin ids, coverage has 6 decimals.
std::string run_log_to_string(const std::vector<RunRecord>& records);
void write_run_log(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_run_log(const std::string& path);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
void write_report_json(const ExperimentReport& report, const std::string& path);
ExperimentReport read_report_json(const std::string& path);

// Fixed-width ASCII table, one row per width, median iterations per
// method; cells whose median seed did not converge render as ">cap".
std::string format_table(const ExperimentReport& report);

struct ConvergenceCurve {
    std::vector<std::pair<std::size_t, double>> points;  // (iteration, coverage)
};

ConvergenceCurve curve_from_records(const std::vector<RunRecord>& records);

// Self-contained SVG chart: iteration on x, coverage on y in [0, 1], one
// polyline per curve, legend from labels. Deterministic bytes.
std::string render_convergence_svg(const std::vector<ConvergenceCurve>& curves,
                                   const std::vector<std::string>& labels);
void write_convergence_svg(const std::vector<ConvergenceCurve>& curves,
                           const std::vector<std::string>& labels, const std::string& path);

// Median iterations per method across widths, chartable from a stored
// report alone. Not-converged cells are drawn at the iteration cap.
std::string render_comparison_svg(const ExperimentReport& report);
void write_comparison_svg(const ExperimentReport& report, const std::string& path);

}  // namespace stimnet
