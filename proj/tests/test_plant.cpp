#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "drivebridge/plant.hpp"
#include "drivebridge/units.hpp"

using namespace drivebridge;
using namespace drivebridge::plant;

namespace {

DriveCommand accel_cmd(double a) {
  DriveCommand c;
  c.accel = a;
  return c;
}

VehicleState at_speed(double v) {
  VehicleState s;
  s.speed = v;
  return s;
}

}  // namespace

TEST(ClampAccel, SaturatesBothSides) {
  EXPECT_EQ(clamp_accel(9.0), 6.0);
  EXPECT_EQ(clamp_accel(-8.0), -6.0);
  EXPECT_EQ(clamp_accel(0.0), 0.0);
  EXPECT_EQ(clamp_accel(5.95), 5.95);
}

TEST(ClampAccel, RejectsNonFinite) {
  EXPECT_THROW(clamp_accel(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(clamp_accel(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(PlantStep, LinearUpdate) {
  const auto next = step(at_speed(10.0), accel_cmd(2.0), 0.1);
  EXPECT_NEAR(next.speed, 10.2, 1e-12);
  EXPECT_NEAR(next.position, 0.1 * (10.0 + 10.2) / 2.0, 1e-12);
  EXPECT_EQ(next.acceleration, 2.0);
}

TEST(PlantStep, SpeedFlooredAtZero) {
  const auto next = step(at_speed(0.1), accel_cmd(-6.0), 0.1);
  EXPECT_EQ(next.speed, 0.0);
  EXPECT_GE(next.position, 0.0);
}

TEST(PlantStep, ReplicaAccelerationStep) {
  const double v = 13.72;
  const auto next = step(at_speed(v), accel_cmd(5.95), 0.1);
  EXPECT_NEAR(next.speed, v + 5.95 * 0.1, 1e-12);
  EXPECT_NEAR(next.speed, 14.315, 1e-9);
}

TEST(PlantStep, CommandIsClamped) {
  const auto next = step(at_speed(10.0), accel_cmd(100.0), 0.1);
  EXPECT_NEAR(next.speed, 10.6, 1e-12);
  EXPECT_EQ(next.acceleration, 6.0);
}

TEST(PlantStep, RejectsNonPositiveDt) {
  EXPECT_THROW(step(at_speed(1.0), accel_cmd(0.0), 0.0), std::invalid_argument);
  EXPECT_THROW(step(at_speed(1.0), accel_cmd(0.0), -0.1), std::invalid_argument);
}

TEST(PlantStep, ConstantAccelerationPositionIsExact) {
  VehicleState s = at_speed(3.0);
  for (int i = 0; i < 50; ++i) s = step(s, accel_cmd(1.5), 0.1);
  EXPECT_NEAR(s.speed, 3.0 + 1.5 * 5.0, 1e-9);
  EXPECT_NEAR(s.position, 3.0 * 5.0 + 0.5 * 1.5 * 25.0, 1e-9);
}

TEST(PlantNode, AppliesNewestCommandAndPublishes) {
  bus::Bus bus;
  const auto cmd_pub = bus.register_publisher("ctrl", bus::TopicName(bus::topics::kAckermannCmd));
  const auto state_sub = bus.register_subscriber("obs", bus::TopicName(bus::topics::kVehicleState));
  PlantNode node(bus, at_speed(10.0));
  SimClock clock(10.0);

  bus.publish(cmd_pub, accel_cmd(1.0), 0.0);
  bus.publish(cmd_pub, accel_cmd(-2.0), 0.0);
  const auto& s = node.tick(clock);
  EXPECT_NEAR(s.speed, 9.8, 1e-12);
  EXPECT_EQ(s.time, clock.next());

  const auto got = bus.drain(state_sub);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(std::get<VehicleStateMsg>(got[0].payload).state, s);
}

TEST(PlantNode, HoldsLastCommandWithoutNewOnes) {
  bus::Bus bus;
  const auto cmd_pub = bus.register_publisher("ctrl", bus::TopicName(bus::topics::kAckermannCmd));
  PlantNode node(bus, at_speed(10.0));
  SimClock clock(10.0);
  bus.publish(cmd_pub, accel_cmd(1.0), 0.0);
  node.tick(clock);
  clock.advance();
  const auto& s = node.tick(clock);
  EXPECT_NEAR(s.speed, 10.2, 1e-12);
}

TEST(SimClockTest, TimesAreTickOverRate) {
  SimClock clock(10.0);
  for (int i = 0; i < 1000; ++i) clock.advance();
  EXPECT_EQ(clock.now(), 100.0);
  EXPECT_EQ(clock.time_at(3), 0.3);
  EXPECT_THROW(SimClock(0.0), std::invalid_argument);
}

TEST(Units, RoundTrip) {
  EXPECT_NEAR(kmh_to_mps(36.0), 10.0, 1e-12);
  EXPECT_NEAR(mps_to_kmh(kmh_to_mps(49.4)), 49.4, 1e-12);
}
