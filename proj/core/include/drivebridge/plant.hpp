#pragma once

// Longitudinal point-mass vehicle model.

#include "drivebridge/bus.hpp"
#include "drivebridge/messages.hpp"
#include "drivebridge/sim_clock.hpp"

namespace drivebridge::plant {

inline constexpr double kMaxAccel = 6.0;   // m/s^2
inline constexpr double kMaxDecel = -6.0;  // m/s^2

/// Clamps a commanded acceleration to [-6, +6] m/s^2. Throws
/// std::invalid_argument for NaN or infinite input.
double clamp_accel(double accel_cmd);

/// Advances `state` by `dt` under `cmd.accel` (clamped). Speed is floored at
/// zero and position uses the mean of the old and new speed, which is exact
/// for piecewise-constant acceleration. Throws std::invalid_argument for
/// dt <= 0.
VehicleState step(const VehicleState& state, const DriveCommand& cmd, double dt);

/// Bus node wrapping `step`: applies the newest command received on
/// /ackermann_cmd and publishes the result on /vehicle_state.
class PlantNode {
 public:
  PlantNode(bus::Bus& bus, VehicleState initial, std::size_t queue_capacity = bus::kDefaultQueueCapacity);

  /// Drains pending commands, integrates one step of clock.dt() and publishes
  /// the new state stamped at the end of the step.
  const VehicleState& tick(const SimClock& clock);

  const VehicleState& state() const { return state_; }
  const DriveCommand& active_command() const { return command_; }

  static constexpr const char* kNodeId = "vehicle_plant";

 private:
  bus::Bus& bus_;
  bus::SubscriptionHandle cmd_sub_;
  bus::PublisherHandle state_pub_;
  VehicleState state_;
  DriveCommand command_;
};

}  // namespace drivebridge::plant
