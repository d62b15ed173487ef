#include "drivebridge/messages.hpp"

#include <array>

namespace drivebridge {

namespace {
constexpr std::array<std::string_view, kNumObjectClasses> kClassNames = {
    "speed_limit_30", "speed_limit_90", "obstacle"};
}  // namespace

std::optional<ObjectClass> object_class_from_id(int id) {
  if (id < 0 || id >= kNumObjectClasses) return std::nullopt;
  return static_cast<ObjectClass>(id);
}

std::string_view class_name(ObjectClass c) { return kClassNames[class_id(c)]; }

std::optional<ObjectClass> object_class_from_name(std::string_view name) {
  for (int i = 0; i < kNumObjectClasses; ++i) {
    if (kClassNames[i] == name) return static_cast<ObjectClass>(i);
  }
  // Accept the CamelCase spelling used in hand-written scenario files.
  if (name == "SpeedLimit30") return ObjectClass::SpeedLimit30;
  if (name == "SpeedLimit90") return ObjectClass::SpeedLimit90;
  if (name == "Obstacle") return ObjectClass::Obstacle;
  return std::nullopt;
}

std::optional<int> posted_limit_kmh(ObjectClass c) {
  switch (c) {
    case ObjectClass::SpeedLimit30:
      return 30;
    case ObjectClass::SpeedLimit90:
      return 90;
    case ObjectClass::Obstacle:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string_view to_string(WeatherCondition c) {
  return c == WeatherCondition::Fog ? "Fog" : "Clear";
}

std::optional<WeatherCondition> weather_condition_from_name(std::string_view name) {
  if (name == "Clear" || name == "clear") return WeatherCondition::Clear;
  if (name == "Fog" || name == "fog") return WeatherCondition::Fog;
  return std::nullopt;
}

WeatherState WeatherState::clear() { return WeatherState{WeatherCondition::Clear, 250.0, 45.0}; }

WeatherState WeatherState::fog() { return WeatherState{WeatherCondition::Fog, 80.0, 5.0}; }

}  // namespace drivebridge
