#pragma once

// Simulated traffic-sign / obstacle detector.
//
// Works on abstract scene geometry instead of pixels: every object ahead of the
// ego vehicle and inside the sensor range is detected with a probability that
// falls off linearly with distance up to the current visibility. Detections
// carry a class, a confidence drawn from a unimodal distribution on [0, 1] and
// a bounding box from a pinhole projection. Drift injectors then distort the
// stream in one of three ways:
//
//   Covariate  - appearance changes: lower confidences, extra misses, box noise
//   PriorShift - class frequencies change: some classes are subsampled
//   Concept    - the class mapping itself changes: labels are rewritten

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "drivebridge/bus.hpp"
#include "drivebridge/messages.hpp"

namespace drivebridge::perception {

using Rng = std::mt19937_64;

struct SceneObject {
  ObjectClass object_class = ObjectClass::SpeedLimit30;
  double position = 0.0;  // m along track
  double width_m = 0.75;
  double height_m = 0.75;

  bool operator==(const SceneObject&) const = default;
};

struct PerceptionConfig {
  double p_base_clear = 0.98;
  double p_base_fog = 0.90;
  double confidence_mean_clear = 0.92;
  double confidence_mean_fog = 0.85;
  double confidence_std = 0.04;
  double focal_norm = 25.0;       // normalized units * m
  double norm_divisor = 100.0;
  double max_range_m = 150.0;
  double bbox_jitter_sigma = 0.0;  // baseline box noise relative to box size

  bool operator==(const PerceptionConfig&) const = default;
};

struct NoDrift {
  bool operator==(const NoDrift&) const = default;
};

struct CovariateDrift {
  double confidence_scale = 1.0;   // (0, 1]
  double miss_rate_boost = 0.0;    // [0, 1)
  double bbox_jitter_sigma = 0.0;  // >= 0, relative to box size

  bool operator==(const CovariateDrift&) const = default;
};

/// Per-class target frequency weights. A class is kept with probability
/// weight / max(weight).
struct PriorShiftDrift {
  std::array<double, kNumObjectClasses> weights{1.0, 1.0, 1.0};

  bool operator==(const PriorShiftDrift&) const = default;
};

/// Total relabel map, indexed by the true class id.
struct ConceptDrift {
  std::array<ObjectClass, kNumObjectClasses> relabel{
      ObjectClass::SpeedLimit30, ObjectClass::SpeedLimit90, ObjectClass::Obstacle};

  bool operator==(const ConceptDrift&) const = default;
};

using DriftSpec = std::variant<NoDrift, CovariateDrift, PriorShiftDrift, ConceptDrift>;

const char* drift_kind_name(const DriftSpec& drift);

/// Throws std::invalid_argument if a parameter is outside its documented range.
void validate(const DriftSpec& drift);
void validate(const SceneObject& obj);
void validate(const WeatherState& weather);

/// Pinhole projection of `obj` as seen from `vehicle`. The box is centred in
/// the image and its size scales with 1/distance; components saturate at 1
/// for objects very close to the camera. Returns nullopt for objects behind
/// the vehicle or beyond max_range_m.
std::optional<BBox> project_bbox(const VehicleState& vehicle, const SceneObject& obj,
                                 const PerceptionConfig& cfg = {});

/// p_base(condition) * max(0, 1 - distance / visibility).
double detection_probability(const WeatherState& weather, double distance,
                             const PerceptionConfig& cfg = {});

/// Mean confidence of the clean detector under `weather`.
double confidence_mean(const WeatherState& weather, const PerceptionConfig& cfg = {});

/// Draws from a Beta distribution with the given mean and standard deviation.
double sample_confidence(double mean, double stddev, Rng& rng);

/// One perception frame, stamped `stamp`, with drift applied. truth_id is the
/// index of the object inside `scene`.
std::vector<Detection> sense(const VehicleState& vehicle, const std::vector<SceneObject>& scene,
                             const WeatherState& weather, const DriftSpec& drift, Rng& rng,
                             double stamp, const PerceptionConfig& cfg = {});

std::vector<Detection> apply_drift(std::vector<Detection> detections, const DriftSpec& drift,
                                   Rng& rng);

/// Ground-truth boxes for the objects `sense` could report from `vehicle`.
struct TruthObject {
  std::uint32_t truth_id = 0;
  ObjectClass object_class = ObjectClass::SpeedLimit30;
  BBox bbox;
};
std::vector<TruthObject> visible_truths(const VehicleState& vehicle,
                                        const std::vector<SceneObject>& scene,
                                        const PerceptionConfig& cfg = {});

/// Scene generation with a class prior: `count` objects spaced `spacing_m`
/// apart starting at `first_position_m`, classes drawn by `weights`.
std::vector<SceneObject> sample_scene(std::size_t count, double first_position_m, double spacing_m,
                                      const std::array<double, kNumObjectClasses>& weights,
                                      Rng& rng);

class PerceptionNode {
 public:
  PerceptionNode(bus::Bus& bus, std::vector<SceneObject> scene, VehicleState initial_vehicle,
                 WeatherState initial_weather, DriftSpec drift, std::uint64_t seed,
                 PerceptionConfig cfg = {});

  /// Consumes pending weather and vehicle-state messages, senses and publishes
  /// the frame on /detections.
  DetectionMsg tick(double now);

  const WeatherState& weather() const { return weather_; }
  const VehicleState& vehicle() const { return vehicle_; }
  const std::vector<SceneObject>& scene() const { return scene_; }
  const PerceptionConfig& config() const { return cfg_; }

  static constexpr const char* kNodeId = "perception";

 private:
  bus::Bus& bus_;
  bus::SubscriptionHandle weather_sub_;
  bus::SubscriptionHandle vehicle_sub_;
  bus::PublisherHandle detections_pub_;
  std::vector<SceneObject> scene_;
  VehicleState vehicle_;
  WeatherState weather_;
  DriftSpec drift_;
  Rng rng_;
  PerceptionConfig cfg_;
};

}  // namespace drivebridge::perception
