#pragma once

// Subcommand implementations behind the `drivebridge` executable. They write
// diagnostics to `err`, results to `out`, and return the process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "drivebridge/scenario.hpp"

namespace drivebridge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInvariant = 3;

enum class TraceFormat { Csv, Jsonl };

struct RunConfig {
  std::optional<std::filesystem::path> scenario_path;
  std::optional<std::string> builtin;
  std::filesystem::path output_dir = "out";
  TraceFormat trace_format = TraceFormat::Csv;
  bool emit_plot = false;
  std::optional<std::uint64_t> seed_override;
};

/// $DRIVEBRIDGE_OUT if set and non-empty, else "out".
std::filesystem::path default_output_dir();

/// Writes trace.{csv,jsonl}, truths.csv, scenario.txt, summary.json and, with
/// emit_plot, speed_profile.svg into output_dir.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

struct MetricsConfig {
  std::filesystem::path trace_path;
  std::optional<std::filesystem::path> truths_path;    // default: truths.csv beside the trace
  std::optional<std::filesystem::path> scenario_path;  // mapping and gate for latency
  bool csv = false;
};

int cmd_metrics(const MetricsConfig& config, std::ostream& out, std::ostream& err);

int cmd_plot(const std::filesystem::path& trace_path, const std::filesystem::path& out_svg,
             std::ostream& out, std::ostream& err);

int cmd_list_builtins(std::ostream& out);

/// Summary document written by cmd_run, exposed for tests.
std::string run_summary_json(const scenario::ScenarioSpec& spec, const scenario::RunOutput& run);

/// Empty when the trace satisfies the runtime invariants, else a description
/// of the first breach.
std::string check_invariants(const trace::Trace& trace);

}  // namespace drivebridge::cli
