#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "drivebridge/controller.hpp"
#include "drivebridge/units.hpp"
#include "oracles.hpp"

using namespace drivebridge;
using namespace drivebridge::controller;

namespace {

Detection det(ObjectClass cls, double conf, double stamp = 0.0) {
  Detection d;
  d.object_class = cls;
  d.confidence = conf;
  d.stamp = stamp;
  return d;
}

constexpr double kOneKmh = 1.0 / 3.6;

}  // namespace

TEST(ControlAccel, ProportionalWithSymmetricClamp) {
  EXPECT_NEAR(control_accel(13.72, 13.72 + 8.5), 5.95, 1e-9);
  EXPECT_NEAR(control_accel(0.0, 20.0), 6.0, 1e-9);
  EXPECT_NEAR(control_accel(15.0, 0.0), -6.0, 1e-9);
  EXPECT_EQ(control_accel(7.0, 7.0), 0.0);
}

TEST(ControlAccel, DecelerationInsideClamp) {
  EXPECT_NEAR(control_accel(4.222, 0.0), -2.9554, 1e-9);
  EXPECT_NEAR(control_accel(kmh_to_mps(40.2), kmh_to_mps(25.0)), 0.7 * (25.0 - 40.2) / 3.6, 1e-12);
}

TEST(ControlAccel, BoundedOnGrid) {
  for (double v = 0.0; v <= 40.0; v += 0.5) {
    for (double t = 0.0; t <= 40.0; t += 0.5) {
      const double a = control_accel(v, t);
      ASSERT_LE(std::abs(a), kMaxAccel);
      ASSERT_EQ(a == 0.0, v == t);
      ASSERT_EQ(a > 0.0, t > v);
    }
  }
}

TEST(ControlAccel, RejectsInvalidSpeeds) {
  EXPECT_THROW(control_accel(std::numeric_limits<double>::quiet_NaN(), 1.0), std::invalid_argument);
  EXPECT_THROW(control_accel(1.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(control_accel(-1.0, 1.0), std::invalid_argument);
}

TEST(SpeedMappingTest, DefaultsAndValidation) {
  SpeedMapping m;
  EXPECT_NEAR(*m.target_mps(30), 25.0 / 3.6, 1e-12);
  EXPECT_NEAR(*m.target_mps(90), 80.0 / 3.6, 1e-12);
  EXPECT_FALSE(m.target_mps(50));
  EXPECT_THROW(m.set(50, 60.0), std::invalid_argument);
  EXPECT_THROW(m.set(50, 0.0), std::invalid_argument);
  m.set(50, 45.0);
  EXPECT_NEAR(*m.target_mps(50), 12.5, 1e-12);
}

TEST(OnDetection, ThirtySignMapsToTwentyFive) {
  const auto s = on_detection(initial_state(kmh_to_mps(40.2)), det(ObjectClass::SpeedLimit30, 0.95),
                              SpeedMapping{});
  EXPECT_NEAR(s.target_speed, 6.944, 1e-3);
  EXPECT_EQ(s.mode, Mode::Adapt);
}

TEST(OnDetection, BelowGateIsIgnored) {
  const auto s0 = initial_state(10.0, 0.5);
  for (auto cls : {ObjectClass::SpeedLimit30, ObjectClass::SpeedLimit90, ObjectClass::Obstacle}) {
    EXPECT_EQ(on_detection(s0, det(cls, 0.3), SpeedMapping{}), s0);
  }
}

TEST(OnDetection, GateIsInclusive) {
  const auto s = on_detection(initial_state(10.0, 0.5), det(ObjectClass::SpeedLimit90, 0.5),
                              SpeedMapping{});
  EXPECT_NEAR(s.target_speed, 80.0 / 3.6, 1e-12);
}

TEST(OnDetection, ObstacleStops) {
  const auto s = on_detection(initial_state(10.0), det(ObjectClass::Obstacle, 0.9, 3.0), SpeedMapping{});
  EXPECT_EQ(s.mode, Mode::Stopping);
  EXPECT_EQ(s.target_speed, 0.0);
  EXPECT_EQ(s.resume_speed, 10.0);
  EXPECT_EQ(s.last_obstacle_stamp, 3.0);
}

TEST(OnDetection, UnmappedLimitWarnsOnly) {
  SpeedMapping only30(std::map<int, double>{{30, 25.0}});
  const auto s0 = initial_state(10.0);
  const auto s = on_detection(s0, det(ObjectClass::SpeedLimit90, 0.9), only30);
  EXPECT_EQ(s.unmapped_limit_warnings, 1u);
  EXPECT_EQ(s.target_speed, s0.target_speed);
  EXPECT_EQ(s.mode, s0.mode);
}

TEST(OnDetection, LimitsDuringStopOnlyChangeResumeTarget) {
  auto s = on_detection(initial_state(10.0), det(ObjectClass::Obstacle, 0.9, 1.0), SpeedMapping{});
  s = on_detection(s, det(ObjectClass::SpeedLimit90, 0.9, 1.5), SpeedMapping{});
  EXPECT_EQ(s.mode, Mode::Stopping);
  EXPECT_EQ(s.target_speed, 0.0);
  EXPECT_NEAR(s.resume_speed, 80.0 / 3.6, 1e-12);

  EXPECT_EQ(release_stop(s, 2.9), s);
  const auto released = release_stop(s, 3.0);
  EXPECT_EQ(released.mode, Mode::Adapt);
  EXPECT_NEAR(released.target_speed, 80.0 / 3.6, 1e-12);
}

TEST(OnSetSpeed, ChangesCruiseTarget) {
  const auto s = on_set_speed(initial_state(5.0), kmh_to_mps(49.4));
  EXPECT_EQ(s.mode, Mode::Maintain);
  EXPECT_NEAR(s.target_speed, 49.4 / 3.6, 1e-12);
  EXPECT_THROW(on_set_speed(s, -1.0), std::invalid_argument);
}

TEST(ControllerTick, PlugInValues) {
  auto s = initial_state(6.944);
  EXPECT_EQ(tick(s, 6.944, 0.0).accel, 0.0);

  s.target_speed = 22.22;
  EXPECT_NEAR(tick(s, 13.72, 0.0).accel, 5.95, 1e-9);

  s = on_detection(s, det(ObjectClass::Obstacle, 0.9), SpeedMapping{});
  const auto cmd = tick(s, 1.0, 0.3);
  EXPECT_NEAR(cmd.accel, -0.7, 1e-12);
  EXPECT_EQ(cmd.steering, 0.0);
  EXPECT_EQ(cmd.stamp, 0.3);
  EXPECT_EQ(cmd.target_speed, 0.0);
}

TEST(SettlingTime, ClosedFormValues) {
  EXPECT_NEAR(settling_time(13.72, 22.22, 0.278), std::log(8.5 / 0.278) / 0.7, 1e-12);
  EXPECT_NEAR(settling_time(13.72, 22.22, 0.278), 4.89, 0.01);
  EXPECT_NEAR(settling_time(11.17, 6.944, 0.278), 3.89, 0.01);
  EXPECT_EQ(settling_time(6.944 + 0.278, 6.944, 0.278), 0.0);
  EXPECT_THROW(settling_time(1.0, 2.0, 0.0), std::invalid_argument);
}

TEST(SettlingTime, MatchesRk4Oracle) {
  for (double v0 : {0.0, 3.0, 11.17, 13.72, 30.0}) {
    for (double target : {0.0, 6.944, 22.22, 35.0}) {
      for (double eps : {kOneKmh, 0.05, 1.0}) {
        const double closed = settling_time(v0, target, eps);
        const double numeric = oracle::rk4_settling_time(v0, target, eps);
        EXPECT_NEAR(closed, numeric, 1e-3) << v0 << " -> " << target << " eps " << eps;
      }
    }
  }
}

TEST(SettlingTime, DiscreteLoopTicks) {
  // 0.93^n decay at 10 Hz: frozen from the discrete oracle.
  EXPECT_EQ(oracle::discrete_settling_ticks(kmh_to_mps(49.4), kmh_to_mps(80.0), kOneKmh, 0.1), 48);
  EXPECT_EQ(oracle::discrete_settling_ticks(kmh_to_mps(40.2), kmh_to_mps(25.0), kOneKmh, 0.1), 38);
}

TEST(ControllerNodeTest, SameTickDetectionChangesCommand) {
  bus::Bus bus;
  const auto det_pub = bus.register_publisher("perception", bus::TopicName(bus::topics::kDetections));
  const auto cmd_sub = bus.register_subscriber("plant", bus::TopicName(bus::topics::kAckermannCmd));
  ControllerNode node(bus, kmh_to_mps(40.2));

  EXPECT_NEAR(node.tick(0.0).target_speed, kmh_to_mps(40.2), 1e-12);
  bus.publish(det_pub, DetectionMsg{0.1, {det(ObjectClass::SpeedLimit30, 0.9, 0.1)}}, 0.1);
  const auto cmd = node.tick(0.1);
  EXPECT_NEAR(cmd.target_speed, kmh_to_mps(25.0), 1e-12);
  EXPECT_EQ(bus.drain(cmd_sub).size(), 2u);
}

TEST(ControllerNodeTest, ObstacleHoldReleases) {
  bus::Bus bus;
  const auto det_pub = bus.register_publisher("perception", bus::TopicName(bus::topics::kDetections));
  ControllerNodeConfig cfg;
  cfg.hold_time = 1.0;
  ControllerNode node(bus, 10.0, cfg);
  bus.publish(det_pub, DetectionMsg{0.0, {det(ObjectClass::Obstacle, 0.9, 0.0)}}, 0.0);
  EXPECT_EQ(node.tick(0.0).target_speed, 0.0);
  EXPECT_EQ(node.tick(0.9).target_speed, 0.0);
  EXPECT_EQ(node.tick(1.0).target_speed, 10.0);
  EXPECT_EQ(node.state().mode, Mode::Maintain);
}
