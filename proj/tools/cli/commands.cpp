#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "cli/svg_plot.hpp"
#include "drivebridge/metrics.hpp"
#include "drivebridge/units.hpp"
#include "json.hpp"

namespace drivebridge::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kSettleEpsilonKmh = 1.0;
constexpr double kLatencyBound = 0.5;
constexpr double kInvariantSlack = 1e-9;

struct Phase {
  double start = 0.0;
  double end = 0.0;
  double v_start_kmh = 0.0;
  double target_kmh = 0.0;
  std::string cause;
  std::optional<double> settling_time;
  double overshoot_kmh = 0.0;
  bool monotone = true;
};

std::vector<Phase> analyse_phases(const trace::Trace& tr, const metrics::LatencyReport& latency) {
  const auto samples = metrics::speed_samples(tr);
  std::vector<std::pair<double, double>> changes;
  for (const auto& rec : tr) {
    if (const auto* c = std::get_if<trace::CommandEvent>(&rec.payload)) {
      if (!changes.empty() && changes.back().second == c->target_speed) continue;
      changes.emplace_back(rec.time, c->target_speed);
    }
  }

  std::vector<Phase> phases;
  for (std::size_t i = 1; i < changes.size(); ++i) {
    Phase p;
    p.start = changes[i].first;
    p.end = i + 1 < changes.size() ? changes[i + 1].first
                                   : std::numeric_limits<double>::infinity();
    p.target_kmh = mps_to_kmh(changes[i].second);
    p.cause = "other";
    for (const auto& s : latency.samples) {
      if (s.effect_stamp == p.start) p.cause = "detection";
    }
    if (p.cause == "other") {
      for (const auto& rec : tr) {
        if (rec.time == p.start && std::holds_alternative<trace::SetpointEvent>(rec.payload)) {
          p.cause = "setpoint";
        }
      }
    }

    std::optional<double> prev;
    for (const auto& s : samples) {
      if (s.time <= p.start) p.v_start_kmh = mps_to_kmh(s.speed);
      if (s.time < p.start || s.time >= p.end) continue;
      if (prev) {
        const bool rising = changes[i].second >= changes[i - 1].second;
        if (rising ? s.speed < *prev : s.speed > *prev) p.monotone = false;
      }
      prev = s.speed;
    }
    const auto stats = metrics::speed_profile_stats(samples, changes[i].second,
                                                    kmh_to_mps(kSettleEpsilonKmh), p.start, p.end);
    p.settling_time = stats.settling_time;
    p.overshoot_kmh = mps_to_kmh(stats.overshoot);
    phases.push_back(p);
  }
  return phases;
}

const Phase* find_phase(const std::vector<Phase>& phases, double target_kmh) {
  for (const auto& p : phases) {
    if (p.cause == "detection" && std::abs(p.target_kmh - target_kmh) < 1e-6) return &p;
  }
  return nullptr;
}

json phase_json(const Phase& p) {
  json j;
  j["start_s"] = p.start;
  j["cause"] = p.cause;
  j["v_start_kmh"] = p.v_start_kmh;
  j["target_kmh"] = p.target_kmh;
  j["settling_time_s"] = p.settling_time ? json(*p.settling_time) : json(nullptr);
  j["overshoot_kmh"] = p.overshoot_kmh;
  j["monotone"] = p.monotone;
  return j;
}

bool write_file(const fs::path& path, const std::string& content, std::ostream& err) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    err << "error: cannot open " << path.string() << " for writing\n";
    return false;
  }
  f << content;
  f.close();
  if (!f) {
    err << "error: failed writing " << path.string() << "\n";
    return false;
  }
  return true;
}

std::optional<trace::Trace> load_trace(const fs::path& path, std::ostream& err) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot read trace " << path.string() << "\n";
    return std::nullopt;
  }
  try {
    return trace::read_any(f);
  } catch (const trace::FormatError& e) {
    err << "error: malformed trace " << path.string() << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

fs::path default_output_dir() {
  if (const char* env = std::getenv("DRIVEBRIDGE_OUT"); env && *env) return env;
  return "out";
}

std::string check_invariants(const trace::Trace& tr) {
  std::ostringstream os;
  for (const auto& rec : tr) {
    if (const auto* s = std::get_if<trace::VehicleSample>(&rec.payload)) {
      if (std::abs(s->acceleration) > controller::kMaxAccel + kInvariantSlack) {
        os << "acceleration " << s->acceleration << " m/s^2 at t=" << rec.time;
      } else if (s->speed < 0.0) {
        os << "negative speed " << s->speed << " m/s at t=" << rec.time;
      }
    } else if (const auto* c = std::get_if<trace::CommandEvent>(&rec.payload)) {
      if (std::abs(c->accel) > controller::kMaxAccel + kInvariantSlack) {
        os << "commanded acceleration " << c->accel << " m/s^2 at t=" << rec.time;
      } else if (c->steering != 0.0) {
        os << "non-zero steering " << c->steering << " rad at t=" << rec.time;
      }
    }
    if (os.tellp() > 0) break;
  }
  return os.str();
}

std::string run_summary_json(const scenario::ScenarioSpec& spec, const scenario::RunOutput& run) {
  const auto latency = metrics::response_latency(run.trace, spec.mapping, spec.confidence_threshold);
  const auto phases = analyse_phases(run.trace, latency);
  const double tick = 1.0 / spec.tick_hz;

  double max_abs_accel = 0.0;
  double final_speed = 0.0;
  for (const auto& [time, s] : trace::vehicle_samples(run.trace)) {
    max_abs_accel = std::max(max_abs_accel, std::abs(s.acceleration));
    final_speed = s.speed;
  }

  json j;
  j["scenario"] = spec.name;
  j["seed"] = spec.seed;
  j["duration_s"] = spec.duration_s;
  j["tick_hz"] = spec.tick_hz;
  j["drift"] = perception::drift_kind_name(spec.drift);
  j["records"] = run.trace.size();
  j["final_speed_kmh"] = mps_to_kmh(final_speed);
  j["max_abs_accel_mps2"] = max_abs_accel;

  json lat = json::array();
  for (const auto& s : latency.samples) {
    lat.push_back({{"trigger_s", s.trigger_stamp},
                   {"effect_s", s.effect_stamp},
                   {"latency_s", s.latency},
                   {"new_target_kmh", mps_to_kmh(s.new_target)}});
  }
  j["latency_samples"] = lat;
  j["latency_anomalies_s"] = latency.anomalies;
  j["setpoint_changes"] = latency.setpoint_changes;

  json ph = json::array();
  for (const auto& p : phases) ph.push_back(phase_json(p));
  j["phases"] = ph;

  const auto dets = metrics::detections_from_trace(run.trace);
  const auto truths = metrics::truths_from_rows(run.truths);
  j["detection_metrics"] = json::parse(metrics::to_json(metrics::evaluate(dets, truths)));

  json acc;
  acc["max_abs_accel_le_6"] = max_abs_accel <= controller::kMaxAccel + kInvariantSlack;
  const double max_lat = latency.max_latency();
  acc["latency_le_0_5_s"] = max_lat <= kLatencyBound;
  acc["latency_le_2_ticks"] = max_lat <= 2.0 * tick + kInvariantSlack;
  acc["no_latency_anomalies"] = latency.anomalies.empty();

  json accel_ac{{"applicable", false}};
  if (const auto* p = find_phase(phases, 80.0)) {
    const bool ok = p->settling_time && std::abs(p->v_start_kmh - 49.4) <= 0.5 &&
                    std::abs(*p->settling_time - 4.8) <= 0.3 + kInvariantSlack &&
                    *p->settling_time <= 5.0;
    accel_ac = {{"applicable", true},
                {"settling_time_s", p->settling_time ? json(*p->settling_time) : json(nullptr)},
                {"pass", ok}};
  }
  acc["acceleration_phase"] = accel_ac;

  json decel_ac{{"applicable", false}};
  if (const auto* p = find_phase(phases, 25.0)) {
    const bool ok = p->settling_time && std::abs(*p->settling_time - 3.9) <= 0.3 + kInvariantSlack &&
                    p->overshoot_kmh <= 0.5 && p->monotone;
    decel_ac = {{"applicable", true},
                {"settling_time_s", p->settling_time ? json(*p->settling_time) : json(nullptr)},
                {"overshoot_kmh", p->overshoot_kmh},
                {"monotone", p->monotone},
                {"pass", ok}};
  }
  acc["deceleration_phase"] = decel_ac;
  j["acceptance"] = acc;
  return j.dump(2) + "\n";
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.scenario_path.has_value() == config.builtin.has_value()) {
    err << "error: give exactly one of --scenario or --builtin\n";
    return kExitInput;
  }

  scenario::ScenarioSpec spec;
  try {
    if (config.builtin) {
      auto b = scenario::builtin_spec(*config.builtin);
      if (!b) {
        err << "error: unknown builtin '" << *config.builtin << "'\n";
        return kExitInput;
      }
      spec = std::move(*b);
    } else {
      spec = scenario::load_scenario_file(config.scenario_path->string());
    }
  } catch (const scenario::ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (config.seed_override) spec.seed = *config.seed_override;

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    err << "error: cannot create " << config.output_dir.string() << ": " << ec.message() << "\n";
    return kExitInput;
  }

  scenario::RunOutput result;
  try {
    result = scenario::run(spec);
  } catch (const std::exception& e) {
    err << "internal error during run: " << e.what() << "\n";
    return kExitInvariant;
  }

  const bool jsonl = config.trace_format == TraceFormat::Jsonl;
  const fs::path trace_path = config.output_dir / (jsonl ? "trace.jsonl" : "trace.csv");
  std::ostringstream truths;
  trace::write_truths_csv(truths, result.truths);

  bool ok = write_file(trace_path, jsonl ? trace::to_jsonl(result.trace) : trace::to_csv(result.trace),
                       err) &&
            write_file(config.output_dir / "truths.csv", truths.str(), err) &&
            write_file(config.output_dir / "scenario.txt", scenario::to_text(spec), err) &&
            write_file(config.output_dir / "summary.json", run_summary_json(spec, result), err);
  if (ok && config.emit_plot) {
    ok = write_file(config.output_dir / "speed_profile.svg",
                    render_speed_profile_svg(result.trace, spec.name), err);
  }
  if (!ok) return kExitInput;

  if (const auto breach = check_invariants(result.trace); !breach.empty()) {
    err << "invariant violated: " << breach << "\n";
    return kExitInvariant;
  }
  out << "wrote " << trace_path.string() << " (" << result.trace.size() << " records)\n";
  return kExitOk;
}

int cmd_metrics(const MetricsConfig& config, std::ostream& out, std::ostream& err) {
  const auto tr = load_trace(config.trace_path, err);
  if (!tr) return kExitInput;

  const fs::path truths_path =
      config.truths_path.value_or(config.trace_path.parent_path() / "truths.csv");
  std::ifstream tf(truths_path, std::ios::binary);
  if (!tf) {
    err << "error: cannot read truths " << truths_path.string() << "\n";
    return kExitInput;
  }
  std::vector<trace::TruthRow> rows;
  try {
    rows = trace::read_truths_csv(tf);
  } catch (const trace::FormatError& e) {
    err << "error: malformed truths " << truths_path.string() << ": " << e.what() << "\n";
    return kExitInput;
  }

  controller::SpeedMapping mapping;
  double threshold = controller::kDefaultThreshold;
  if (config.scenario_path) {
    try {
      const auto spec = scenario::load_scenario_file(config.scenario_path->string());
      mapping = spec.mapping;
      threshold = spec.confidence_threshold;
    } catch (const scenario::ScenarioError& e) {
      err << "error: " << e.what() << "\n";
      return kExitInput;
    }
  }

  const auto report =
      metrics::evaluate(metrics::detections_from_trace(*tr), metrics::truths_from_rows(rows));
  const auto latency = metrics::response_latency(*tr, mapping, threshold);

  if (config.csv) {
    out << metrics::csv_header() << "\n" << metrics::to_csv_row(report) << "\n";
    return kExitOk;
  }
  json j;
  j["detection"] = json::parse(metrics::to_json(report));
  double sum = 0.0;
  for (const auto& s : latency.samples) sum += s.latency;
  j["latency"] = {
      {"count", latency.samples.size()},
      {"max_s", latency.max_latency()},
      {"mean_s", latency.samples.empty() ? 0.0 : sum / static_cast<double>(latency.samples.size())},
      {"anomalies", latency.anomalies.size()},
      {"setpoint_changes", latency.setpoint_changes}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_plot(const fs::path& trace_path, const fs::path& out_svg, std::ostream& out,
             std::ostream& err) {
  const auto tr = load_trace(trace_path, err);
  if (!tr) return kExitInput;
  std::string svg;
  try {
    svg = render_speed_profile_svg(*tr, trace_path.stem().string());
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  if (!write_file(out_svg, svg, err)) return kExitInput;
  out << "wrote " << out_svg.string() << "\n";
  return kExitOk;
}

int cmd_list_builtins(std::ostream& out) {
  for (const auto& name : scenario::builtin_names()) out << name << "\n";
  return kExitOk;
}

}  // namespace drivebridge::cli
