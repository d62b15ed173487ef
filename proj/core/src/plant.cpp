#include "drivebridge/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drivebridge::plant {

double clamp_accel(double accel_cmd) {
  if (!std::isfinite(accel_cmd)) {
    throw std::invalid_argument("commanded acceleration must be finite");
  }
  return std::clamp(accel_cmd, kMaxDecel, kMaxAccel);
}

VehicleState step(const VehicleState& state, const DriveCommand& cmd, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step dt must be > 0");
  const double a = clamp_accel(cmd.accel);
  const double v_next = std::max(0.0, state.speed + a * dt);
  VehicleState next;
  next.speed = v_next;
  next.position = state.position + 0.5 * (state.speed + v_next) * dt;
  next.acceleration = a;
  next.time = state.time + dt;
  return next;
}

PlantNode::PlantNode(bus::Bus& bus, VehicleState initial, std::size_t queue_capacity)
    : bus_(bus),
      cmd_sub_(bus.register_subscriber(kNodeId, bus::TopicName(bus::topics::kAckermannCmd),
                                       queue_capacity)),
      state_pub_(bus.register_publisher(kNodeId, bus::TopicName(bus::topics::kVehicleState))),
      state_(initial) {}

const VehicleState& PlantNode::tick(const SimClock& clock) {
  for (auto& env : bus_.drain(cmd_sub_)) {
    if (const auto* cmd = std::get_if<DriveCommand>(&env.payload)) command_ = *cmd;
  }
  state_ = step(state_, command_, clock.dt());
  state_.time = clock.next();
  bus_.publish(state_pub_, VehicleStateMsg{state_}, clock.now());
  return state_;
}

}  // namespace drivebridge::plant
