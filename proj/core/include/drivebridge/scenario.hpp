#pragma once

// Declarative scenarios and the deterministic fixed-step runner.
//
// Scenario files are line-oriented `key = value` text split into sections:
//
//   [scenario]     name, seed, duration_s, tick_hz, initial_speed_kmh,
//                  track_length_m, confidence_threshold, hold_time_s,
//                  queue_capacity
//   [object.N]     class, position_m, width_m, height_m
//   [weather.N]    time_s, condition, visibility_m, sun_altitude_deg
//   [setpoint.N]   time_s, speed_kmh
//   [drift]        kind = None | Covariate | PriorShift | Concept, plus
//                  confidence_scale, miss_rate_boost, bbox_jitter_sigma,
//                  weight.<class>, relabel.<class>
//   [mapping]      <limit_kmh> = <target_kmh>
//   [perception]   p_base_clear, p_base_fog, confidence_mean_clear,
//                  confidence_mean_fog, confidence_std, max_range_m,
//                  bbox_jitter_sigma
//
// '#' starts a comment. Sections numbered N are ordered by N.
//
// Every tick runs weather -> sense -> decide -> act, and each stage publishes
// on the bus before the next one reads it. A detection therefore changes the
// command of the same tick.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drivebridge/controller.hpp"
#include "drivebridge/perception.hpp"
#include "drivebridge/trace.hpp"

namespace drivebridge::scenario {

struct WeatherPhase {
  double time_s = 0.0;
  WeatherState weather;

  bool operator==(const WeatherPhase&) const = default;
};

struct Setpoint {
  double time_s = 0.0;
  double speed_kmh = 0.0;

  bool operator==(const Setpoint&) const = default;
};

struct ScenarioSpec {
  std::string name = "unnamed";
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  double tick_hz = 10.0;
  double initial_speed_kmh = 0.0;
  double track_length_m = 1000.0;
  std::vector<perception::SceneObject> objects;
  std::vector<WeatherPhase> weather_schedule;
  std::vector<Setpoint> setpoints;
  perception::DriftSpec drift = perception::NoDrift{};
  controller::SpeedMapping mapping;
  double confidence_threshold = controller::kDefaultThreshold;
  double hold_time_s = controller::kDefaultHoldTime;
  std::size_t queue_capacity = bus::kDefaultQueueCapacity;
  perception::PerceptionConfig perception;

  bool operator==(const ScenarioSpec&) const = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text: unknown section or key, unparsable value.
class ParseError : public ScenarioError {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Well-formed text describing an impossible scenario.
class ValidationError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

ScenarioSpec load_scenario(std::string_view text);
ScenarioSpec load_scenario_file(const std::string& path);

/// Throws ValidationError.
void validate(const ScenarioSpec& spec);

/// Serializes `spec` so that load_scenario(to_text(spec)) == spec.
std::string to_text(const ScenarioSpec& spec);

/// Built-in scenario reproducing the fog 30-sign / clear 90-sign test drive.
ScenarioSpec paper_replica_spec();

std::vector<std::string> builtin_names();
std::optional<ScenarioSpec> builtin_spec(std::string_view name);

struct RunOutput {
  trace::Trace trace;
  std::vector<trace::TruthRow> truths;
};

RunOutput run(const ScenarioSpec& spec);

}  // namespace drivebridge::scenario
