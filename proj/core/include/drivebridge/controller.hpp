#pragma once

// Adaptive longitudinal speed controller.
//
// The decision side turns detections into a target speed: posted limits go
// through a mapping table (30 -> 25 km/h, 90 -> 80 km/h by default), obstacles
// force a stop that is held until no obstacle has been seen for hold_time.
// The control side is a saturated proportional law on the speed error,
//
//   a = clamp(0.7 * (v_target - v), -6, +6)   [m/s^2, speeds in m/s]

#include <cstdint>
#include <map>
#include <optional>

#include "drivebridge/bus.hpp"
#include "drivebridge/messages.hpp"

namespace drivebridge::controller {

inline constexpr double kGain = 0.7;             // 1/s
inline constexpr double kMaxAccel = 6.0;         // m/s^2
inline constexpr double kDefaultThreshold = 0.5;
inline constexpr double kDefaultHoldTime = 2.0;  // s

enum class Mode : std::uint8_t { Maintain, Adapt, Stopping };

const char* to_string(Mode mode);

/// Detected posted limit (km/h) -> commanded target (km/h).
class SpeedMapping {
 public:
  SpeedMapping();  // {30 -> 25, 90 -> 80}
  explicit SpeedMapping(std::map<int, double> entries_kmh);

  /// Target in m/s, nullopt when the limit has no entry.
  std::optional<double> target_mps(int limit_kmh) const;

  /// Throws std::invalid_argument unless 0 < value <= key for every entry.
  void set(int limit_kmh, double target_kmh);

  const std::map<int, double>& entries_kmh() const { return entries_; }

  bool operator==(const SpeedMapping&) const = default;

 private:
  std::map<int, double> entries_;
};

struct ControllerState {
  Mode mode = Mode::Maintain;
  double target_speed = 0.0;  // m/s
  double last_detection_stamp = 0.0;
  double confidence_threshold = kDefaultThreshold;

  // Stop handling: the target to restore once the obstacle hold expires.
  double last_obstacle_stamp = 0.0;
  double resume_speed = 0.0;
  Mode resume_mode = Mode::Maintain;

  std::uint64_t unmapped_limit_warnings = 0;

  bool operator==(const ControllerState&) const = default;
};

ControllerState initial_state(double cruise_speed_mps, double confidence_threshold = kDefaultThreshold);

/// clamp(kGain * (target - current), -kMaxAccel, +kMaxAccel). Throws
/// std::invalid_argument for non-finite or negative speeds.
double control_accel(double current_speed, double target_speed);

/// Applies one detection. Detections below the confidence gate return the
/// state unchanged. A limit absent from `mapping` increments
/// unmapped_limit_warnings and changes nothing else.
ControllerState on_detection(const ControllerState& state, const Detection& det,
                             const SpeedMapping& mapping);

/// Operator cruise setpoint. While stopping it only replaces the resume target.
ControllerState on_set_speed(const ControllerState& state, double speed_mps);

/// Leaves Stopping once `hold_time` has elapsed since the last obstacle.
ControllerState release_stop(const ControllerState& state, double now,
                             double hold_time = kDefaultHoldTime);

DriveCommand tick(const ControllerState& state, double vehicle_speed, double now);

/// Continuous-time time for dv/dt = clamp(kGain * (v_target - v), +-kMaxAccel)
/// to bring |v - v_target| within epsilon, starting from v0: a constant-rate
/// ramp while saturated followed by exponential decay. Returns 0 when v0 is
/// already within epsilon. Throws std::invalid_argument for epsilon <= 0.
double settling_time(double v0, double v_target, double epsilon);

struct ControllerNodeConfig {
  SpeedMapping mapping;
  double confidence_threshold = kDefaultThreshold;
  double hold_time = kDefaultHoldTime;
};

/// Decision node. Reads /detections, /vehicle_state and
/// /set_speed, publishes DriveCommand on /ackermann_cmd once per tick.
class ControllerNode {
 public:
  ControllerNode(bus::Bus& bus, double initial_speed_mps, ControllerNodeConfig cfg = {},
                 std::size_t queue_capacity = bus::kDefaultQueueCapacity);

  DriveCommand tick(double now);

  const ControllerState& state() const { return state_; }
  double vehicle_speed() const { return vehicle_speed_; }

  static constexpr const char* kNodeId = "speed_controller";

 private:
  bus::Bus& bus_;
  bus::SubscriptionHandle detections_sub_;
  bus::SubscriptionHandle vehicle_sub_;
  bus::SubscriptionHandle set_speed_sub_;
  bus::PublisherHandle cmd_pub_;
  ControllerNodeConfig cfg_;
  ControllerState state_;
  double vehicle_speed_;
};

}  // namespace drivebridge::controller
