#include "drivebridge/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "drivebridge/units.hpp"

namespace drivebridge::controller {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Maintain:
      return "Maintain";
    case Mode::Adapt:
      return "Adapt";
    case Mode::Stopping:
      return "Stopping";
  }
  return "?";
}

SpeedMapping::SpeedMapping() : SpeedMapping(std::map<int, double>{{30, 25.0}, {90, 80.0}}) {}

SpeedMapping::SpeedMapping(std::map<int, double> entries_kmh) {
  for (const auto& [limit, target] : entries_kmh) set(limit, target);
}

std::optional<double> SpeedMapping::target_mps(int limit_kmh) const {
  auto it = entries_.find(limit_kmh);
  if (it == entries_.end()) return std::nullopt;
  return kmh_to_mps(it->second);
}

void SpeedMapping::set(int limit_kmh, double target_kmh) {
  if (!(target_kmh > 0.0) || target_kmh > static_cast<double>(limit_kmh)) {
    throw std::invalid_argument("mapping " + std::to_string(limit_kmh) +
                                " -> target must satisfy 0 < target <= limit");
  }
  entries_[limit_kmh] = target_kmh;
}

ControllerState initial_state(double cruise_speed_mps, double confidence_threshold) {
  if (!(cruise_speed_mps >= 0.0)) throw std::invalid_argument("cruise speed must be >= 0");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw std::invalid_argument("confidence threshold must be in [0, 1]");
  }
  ControllerState s;
  s.target_speed = cruise_speed_mps;
  s.resume_speed = cruise_speed_mps;
  s.confidence_threshold = confidence_threshold;
  return s;
}

double control_accel(double current_speed, double target_speed) {
  if (!std::isfinite(current_speed) || !std::isfinite(target_speed)) {
    throw std::invalid_argument("control_accel: speeds must be finite");
  }
  if (current_speed < 0.0 || target_speed < 0.0) {
    throw std::invalid_argument("control_accel: speeds must be >= 0");
  }
  return std::clamp(kGain * (target_speed - current_speed), -kMaxAccel, kMaxAccel);
}

ControllerState on_detection(const ControllerState& state, const Detection& det,
                             const SpeedMapping& mapping) {
  if (det.confidence < state.confidence_threshold) return state;

  ControllerState next = state;
  if (det.object_class == ObjectClass::Obstacle) {
    if (next.mode != Mode::Stopping) {
      next.resume_speed = next.target_speed;
      next.resume_mode = next.mode;
    }
    next.mode = Mode::Stopping;
    next.target_speed = 0.0;
    next.last_obstacle_stamp = det.stamp;
    next.last_detection_stamp = det.stamp;
    return next;
  }

  const auto limit = posted_limit_kmh(det.object_class);
  const auto target = limit ? mapping.target_mps(*limit) : std::nullopt;
  if (!target) {
    ++next.unmapped_limit_warnings;
    return next;
  }
  next.last_detection_stamp = det.stamp;
  if (next.mode == Mode::Stopping) {
    next.resume_speed = *target;
    next.resume_mode = Mode::Adapt;
  } else {
    next.target_speed = *target;
    next.mode = Mode::Adapt;
  }
  return next;
}

ControllerState on_set_speed(const ControllerState& state, double speed_mps) {
  if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps)) {
    throw std::invalid_argument("set speed must be finite and >= 0");
  }
  ControllerState next = state;
  if (next.mode == Mode::Stopping) {
    next.resume_speed = speed_mps;
    next.resume_mode = Mode::Maintain;
  } else {
    next.target_speed = speed_mps;
    next.mode = Mode::Maintain;
  }
  return next;
}

ControllerState release_stop(const ControllerState& state, double now, double hold_time) {
  if (state.mode != Mode::Stopping || now - state.last_obstacle_stamp < hold_time) return state;
  ControllerState next = state;
  next.mode = state.resume_mode;
  next.target_speed = state.resume_speed;
  return next;
}

DriveCommand tick(const ControllerState& state, double vehicle_speed, double now) {
  DriveCommand cmd;
  cmd.target_speed = state.target_speed;
  cmd.accel = control_accel(vehicle_speed, state.target_speed);
  cmd.steering = 0.0;
  cmd.stamp = now;
  return cmd;
}

double settling_time(double v0, double v_target, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("settling_time: epsilon must be > 0");
  const double error = std::abs(v_target - v0);
  if (error <= epsilon) return 0.0;

  // Saturation holds while kGain * error > kMaxAccel.
  const double saturation_error = kMaxAccel / kGain;
  double t = 0.0;
  double e = error;
  if (e > saturation_error) {
    const double ramp_end = std::max(saturation_error, epsilon);
    t += (e - ramp_end) / kMaxAccel;
    e = ramp_end;
  }
  if (e > epsilon) t += std::log(e / epsilon) / kGain;
  return t;
}

ControllerNode::ControllerNode(bus::Bus& bus, double initial_speed_mps, ControllerNodeConfig cfg,
                               std::size_t queue_capacity)
    : bus_(bus),
      detections_sub_(bus.register_subscriber(kNodeId, bus::TopicName(bus::topics::kDetections),
                                              queue_capacity)),
      vehicle_sub_(bus.register_subscriber(kNodeId, bus::TopicName(bus::topics::kVehicleState),
                                           queue_capacity)),
      set_speed_sub_(bus.register_subscriber(kNodeId, bus::TopicName(bus::topics::kSetSpeed),
                                             queue_capacity)),
      cmd_pub_(bus.register_publisher(kNodeId, bus::TopicName(bus::topics::kAckermannCmd))),
      cfg_(std::move(cfg)),
      state_(initial_state(initial_speed_mps, cfg_.confidence_threshold)),
      vehicle_speed_(initial_speed_mps) {}

DriveCommand ControllerNode::tick(double now) {
  for (auto& env : bus_.drain(vehicle_sub_)) {
    if (const auto* msg = std::get_if<VehicleStateMsg>(&env.payload)) {
      vehicle_speed_ = msg->state.speed;
    }
  }
  for (auto& env : bus_.drain(set_speed_sub_)) {
    if (const auto* msg = std::get_if<SetSpeedMsg>(&env.payload)) {
      state_ = on_set_speed(state_, msg->speed);
    }
  }
  for (auto& env : bus_.drain(detections_sub_)) {
    if (const auto* frame = std::get_if<DetectionMsg>(&env.payload)) {
      for (const auto& det : frame->detections) state_ = on_detection(state_, det, cfg_.mapping);
    }
  }
  state_ = release_stop(state_, now, cfg_.hold_time);
  DriveCommand cmd = controller::tick(state_, vehicle_speed_, now);
  bus_.publish(cmd_pub_, cmd, now);
  return cmd;
}

}  // namespace drivebridge::controller
