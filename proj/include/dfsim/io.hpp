#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "dfsim/analysis.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/feedback.hpp"
#include "dfsim/reduction.hpp"
#include "dfsim/scenario.hpp"
#include "dfsim/trace.hpp"

namespace dfsim {

inline constexpr int kTraceVersion = 1;
inline constexpr std::string_view kTraceFormat = "dfsim-trace";

/// Canonical JSON text of a scenario (stable key order, two-space indent,
/// trailing newline). Rationals are written as "num/den" strings.
std::string serialize_scenario(const ScenarioConfig& config);

/// Strict parse: unknown keys, wrong types and dangling edge references all
/// raise ParseError. Syntax errors report line and column; semantic errors
/// report the JSON path of the offending value. The result is validated.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& config, const std::string& path);

/// FNV-1a 64 of the canonical compact scenario text, as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& config);

/// Line-delimited trace: a header with format, version, scenario hash and
/// the full scenario; one record per event; one record per round with the
/// queue sizes when they were recorded; a closing record with the digest.
void write_trace(const ExecutionTrace& trace, std::ostream& out);
/// Rejects other formats, other versions and headers whose hash does not
/// match the embedded scenario.
ExecutionTrace read_trace(std::istream& in);
void save_trace(const ExecutionTrace& trace, const std::string& path);
ExecutionTrace load_trace(const std::string& path);

/// CSV with one row per (round, edge): round,edge,queue_len,Q_total.
void write_metrics_csv(const ExecutionTrace& trace, std::ostream& out);

// Structured reports, serialized as canonical JSON text.
std::string report_json(const ExecutionTrace& trace, const IntervalVerdict& verdict, std::string_view mode);
std::string report_json(const ExecutionTrace& trace, const RecoveryVerdict& verdict);
std::string report_json(const StabilityReport& report);
std::string report_json(const ExecutionTrace& trace, const ReductionVerdict& verdict, const TwoPriorityTrace& two);

}  // namespace dfsim
