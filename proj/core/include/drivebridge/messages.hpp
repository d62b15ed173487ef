#pragma once

// Payload types exchanged between nodes on the bus.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace drivebridge {

/// 1-D kinematic state of the ego vehicle.
struct VehicleState {
  double position = 0.0;      // m along track
  double speed = 0.0;         // m/s, never negative
  double acceleration = 0.0;  // m/s^2 applied during the last step
  double time = 0.0;          // s

  bool operator==(const VehicleState&) const = default;
};

/// Ackermann-style drive command. Only the longitudinal part is used; steering
/// stays at zero on a 1-D track.
struct DriveCommand {
  double target_speed = 0.0;  // m/s
  double accel = 0.0;         // m/s^2, before plant clamping
  double steering = 0.0;      // rad
  double stamp = 0.0;         // s

  bool operator==(const DriveCommand&) const = default;
};

enum class ObjectClass : std::uint8_t { SpeedLimit30 = 0, SpeedLimit90 = 1, Obstacle = 2 };

inline constexpr int kNumObjectClasses = 3;

constexpr int class_id(ObjectClass c) { return static_cast<int>(c); }
std::optional<ObjectClass> object_class_from_id(int id);
std::string_view class_name(ObjectClass c);
std::optional<ObjectClass> object_class_from_name(std::string_view name);

/// Posted limit in km/h for speed-limit classes, nullopt for obstacles.
std::optional<int> posted_limit_kmh(ObjectClass c);

/// Normalized image box, centre form. All components in [0, 1].
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const BBox&) const = default;
};

struct Detection {
  ObjectClass object_class = ObjectClass::SpeedLimit30;
  double confidence = 0.0;
  BBox bbox;
  double stamp = 0.0;
  // Index of the ground-truth scene object. Scoring only; the controller
  // never reads it.
  std::optional<std::uint32_t> truth_id;

  int class_id() const { return drivebridge::class_id(object_class); }
  std::string_view class_name() const { return drivebridge::class_name(object_class); }

  bool operator==(const Detection&) const = default;
};

enum class WeatherCondition : std::uint8_t { Clear = 0, Fog = 1 };

std::string_view to_string(WeatherCondition c);
std::optional<WeatherCondition> weather_condition_from_name(std::string_view name);

struct WeatherState {
  WeatherCondition condition = WeatherCondition::Clear;
  double visibility_m = 250.0;
  double sun_altitude_deg = 45.0;

  static WeatherState clear();
  static WeatherState fog();

  bool operator==(const WeatherState&) const = default;
};

/// One perception frame. Published every tick, possibly empty.
struct DetectionMsg {
  double stamp = 0.0;
  std::vector<Detection> detections;

  bool operator==(const DetectionMsg&) const = default;
};

struct WeatherMsg {
  WeatherState weather;
  double stamp = 0.0;

  bool operator==(const WeatherMsg&) const = default;
};

struct VehicleStateMsg {
  VehicleState state;

  bool operator==(const VehicleStateMsg&) const = default;
};

/// Operator set-speed request (cruise setpoint), m/s.
struct SetSpeedMsg {
  double speed = 0.0;
  double stamp = 0.0;

  bool operator==(const SetSpeedMsg&) const = default;
};

using Payload = std::variant<DetectionMsg, DriveCommand, WeatherMsg, VehicleStateMsg, SetSpeedMsg>;

}  // namespace drivebridge
