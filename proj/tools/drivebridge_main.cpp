#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"

namespace cli = drivebridge::cli;

int main(int argc, char** argv) {
  CLI::App app{"drivebridge: perception-driven speed adaptation simulator"};
  app.require_subcommand(1);

  cli::RunConfig run_cfg;
  run_cfg.output_dir = cli::default_output_dir();
  std::string scenario_path;
  std::string builtin;
  std::string format = "csv";
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write its trace and summary");
  auto* scen_opt = run->add_option("--scenario", scenario_path, "Scenario file");
  auto* builtin_opt = run->add_option("--builtin", builtin, "Built-in scenario name");
  scen_opt->excludes(builtin_opt);
  run->add_option("--output-dir", run_cfg.output_dir,
                  "Output directory (default: $DRIVEBRIDGE_OUT or ./out)");
  run->add_option("--trace-format", format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_flag("--emit-plot", run_cfg.emit_plot, "Also write speed_profile.svg");
  auto* seed_opt = run->add_option("--seed-override", seed, "Replace the scenario seed");

  cli::MetricsConfig met_cfg;
  std::string truths_path;
  std::string mapping_scenario;
  auto* metrics = app.add_subcommand("metrics", "Score detections and latency in a trace");
  metrics->add_option("--trace", met_cfg.trace_path, "Trace file (csv or jsonl)")->required();
  auto* truths_opt =
      metrics->add_option("--truths", truths_path, "Ground truth csv (default: beside trace)");
  auto* mapping_opt =
      metrics->add_option("--scenario", mapping_scenario, "Scenario supplying mapping and gate");
  metrics->add_flag("--csv", met_cfg.csv, "Print a csv row instead of json");

  std::string plot_trace;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Render the speed profile of a trace as SVG");
  plot->add_option("--trace", plot_trace, "Trace file (csv or jsonl)")->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();

  auto* list = app.add_subcommand("list-builtins", "List built-in scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitInput;
  }

  if (run->parsed()) {
    if (*scen_opt) run_cfg.scenario_path = scenario_path;
    if (*builtin_opt) run_cfg.builtin = builtin;
    if (*seed_opt) run_cfg.seed_override = seed;
    run_cfg.trace_format = format == "jsonl" ? cli::TraceFormat::Jsonl : cli::TraceFormat::Csv;
    return cli::cmd_run(run_cfg, std::cout, std::cerr);
  }
  if (metrics->parsed()) {
    if (*truths_opt) met_cfg.truths_path = truths_path;
    if (*mapping_opt) met_cfg.scenario_path = mapping_scenario;
    return cli::cmd_metrics(met_cfg, std::cout, std::cerr);
  }
  if (plot->parsed()) return cli::cmd_plot(plot_trace, plot_out, std::cout, std::cerr);
  if (list->parsed()) return cli::cmd_list_builtins(std::cout);
  return cli::kExitInput;
}
