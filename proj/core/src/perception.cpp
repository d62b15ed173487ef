#include "drivebridge/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace drivebridge::perception {

namespace {

constexpr double kMinBoxSize = 1e-4;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Noise is relative to the box size: centres move by sigma * extent, extents
// scale by (1 + sigma * z).
BBox jitter(const BBox& box, double sigma, Rng& rng) {
  if (sigma <= 0.0) return box;
  std::normal_distribution<double> z(0.0, 1.0);
  BBox out;
  out.cx = std::clamp(box.cx + sigma * box.w * z(rng), 0.0, 1.0);
  out.cy = std::clamp(box.cy + sigma * box.h * z(rng), 0.0, 1.0);
  out.w = std::clamp(box.w * (1.0 + sigma * z(rng)), kMinBoxSize, 1.0);
  out.h = std::clamp(box.h * (1.0 + sigma * z(rng)), kMinBoxSize, 1.0);
  return out;
}

struct DriftApplier {
  std::vector<Detection>& dets;
  Rng& rng;

  void operator()(const NoDrift&) const {}

  void operator()(const CovariateDrift& d) const {
    std::vector<Detection> kept;
    kept.reserve(dets.size());
    for (auto& det : dets) {
      // Exactly one miss draw per detection, whatever the boost.
      if (uniform01(rng) < d.miss_rate_boost) continue;
      det.confidence = std::clamp(det.confidence * d.confidence_scale, 0.0, 1.0);
      det.bbox = jitter(det.bbox, d.bbox_jitter_sigma, rng);
      kept.push_back(det);
    }
    dets = std::move(kept);
  }

  void operator()(const PriorShiftDrift& d) const {
    const double max_w = *std::max_element(d.weights.begin(), d.weights.end());
    std::vector<Detection> kept;
    kept.reserve(dets.size());
    for (auto& det : dets) {
      const double keep = d.weights[det.class_id()] / max_w;
      if (uniform01(rng) < keep) kept.push_back(det);
    }
    dets = std::move(kept);
  }

  void operator()(const ConceptDrift& d) const {
    for (auto& det : dets) det.object_class = d.relabel[det.class_id()];
  }
};

}  // namespace

const char* drift_kind_name(const DriftSpec& drift) {
  switch (drift.index()) {
    case 1:
      return "Covariate";
    case 2:
      return "PriorShift";
    case 3:
      return "Concept";
    default:
      return "None";
  }
}

void validate(const DriftSpec& drift) {
  if (const auto* c = std::get_if<CovariateDrift>(&drift)) {
    if (!(c->confidence_scale > 0.0 && c->confidence_scale <= 1.0)) {
      throw std::invalid_argument("covariate confidence_scale must be in (0, 1]");
    }
    if (!(c->miss_rate_boost >= 0.0 && c->miss_rate_boost < 1.0)) {
      throw std::invalid_argument("covariate miss_rate_boost must be in [0, 1)");
    }
    if (!(c->bbox_jitter_sigma >= 0.0)) {
      throw std::invalid_argument("covariate bbox_jitter_sigma must be >= 0");
    }
  } else if (const auto* p = std::get_if<PriorShiftDrift>(&drift)) {
    double total = 0.0;
    for (double w : p->weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("prior-shift weights must be finite and >= 0");
      }
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("prior-shift weights must not all be zero");
  }
}

void validate(const SceneObject& obj) {
  if (!(obj.position >= 0.0)) throw std::invalid_argument("object position must be >= 0");
  if (!(obj.width_m > 0.0) || !(obj.height_m > 0.0)) {
    throw std::invalid_argument("object dimensions must be > 0");
  }
}

void validate(const WeatherState& weather) {
  if (!(weather.visibility_m > 0.0)) throw std::invalid_argument("visibility_m must be > 0");
  if (weather.condition == WeatherCondition::Fog &&
      weather.visibility_m > WeatherState::clear().visibility_m) {
    throw std::invalid_argument("fog visibility must not exceed clear-weather visibility");
  }
}

std::optional<BBox> project_bbox(const VehicleState& vehicle, const SceneObject& obj,
                                 const PerceptionConfig& cfg) {
  const double distance = obj.position - vehicle.position;
  if (distance < 0.0 || distance > cfg.max_range_m) return std::nullopt;
  auto extent = [&](double size_m) {
    if (distance == 0.0) return 1.0;
    return std::min(1.0, cfg.focal_norm * size_m / (distance * cfg.norm_divisor));
  };
  return BBox{0.5, 0.5, extent(obj.width_m), extent(obj.height_m)};
}

double detection_probability(const WeatherState& weather, double distance,
                             const PerceptionConfig& cfg) {
  const double p_base =
      weather.condition == WeatherCondition::Fog ? cfg.p_base_fog : cfg.p_base_clear;
  return p_base * std::max(0.0, 1.0 - distance / weather.visibility_m);
}

double confidence_mean(const WeatherState& weather, const PerceptionConfig& cfg) {
  return weather.condition == WeatherCondition::Fog ? cfg.confidence_mean_fog
                                                    : cfg.confidence_mean_clear;
}

double sample_confidence(double mean, double stddev, Rng& rng) {
  if (stddev <= 0.0) return std::clamp(mean, 0.0, 1.0);
  // Method of moments for Beta(alpha, beta).
  const double k = mean * (1.0 - mean) / (stddev * stddev) - 1.0;
  if (k <= 0.0) return std::clamp(mean, 0.0, 1.0);
  const double x = std::gamma_distribution<double>(mean * k, 1.0)(rng);
  const double y = std::gamma_distribution<double>((1.0 - mean) * k, 1.0)(rng);
  return std::clamp(x / (x + y), 0.0, 1.0);
}

std::vector<Detection> sense(const VehicleState& vehicle, const std::vector<SceneObject>& scene,
                             const WeatherState& weather, const DriftSpec& drift, Rng& rng,
                             double stamp, const PerceptionConfig& cfg) {
  std::vector<Detection> out;
  const double conf_mean = confidence_mean(weather, cfg);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& obj = scene[i];
    const auto box = project_bbox(vehicle, obj, cfg);
    if (!box) continue;
    const double distance = obj.position - vehicle.position;
    if (uniform01(rng) >= detection_probability(weather, distance, cfg)) continue;

    Detection det;
    det.object_class = obj.object_class;
    det.confidence = sample_confidence(conf_mean, cfg.confidence_std, rng);
    det.bbox = jitter(*box, cfg.bbox_jitter_sigma, rng);
    det.stamp = stamp;
    det.truth_id = static_cast<std::uint32_t>(i);
    out.push_back(det);
  }
  return apply_drift(std::move(out), drift, rng);
}

std::vector<Detection> apply_drift(std::vector<Detection> detections, const DriftSpec& drift,
                                   Rng& rng) {
  std::visit(DriftApplier{detections, rng}, drift);
  return detections;
}

std::vector<TruthObject> visible_truths(const VehicleState& vehicle,
                                        const std::vector<SceneObject>& scene,
                                        const PerceptionConfig& cfg) {
  std::vector<TruthObject> out;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (auto box = project_bbox(vehicle, scene[i], cfg)) {
      out.push_back({static_cast<std::uint32_t>(i), scene[i].object_class, *box});
    }
  }
  return out;
}

std::vector<SceneObject> sample_scene(std::size_t count, double first_position_m, double spacing_m,
                                      const std::array<double, kNumObjectClasses>& weights,
                                      Rng& rng) {
  validate(DriftSpec{PriorShiftDrift{weights}});
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<SceneObject> scene;
  scene.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SceneObject obj;
    obj.object_class = static_cast<ObjectClass>(pick(rng));
    obj.position = first_position_m + spacing_m * static_cast<double>(i);
    scene.push_back(obj);
  }
  return scene;
}

PerceptionNode::PerceptionNode(bus::Bus& bus, std::vector<SceneObject> scene,
                               VehicleState initial_vehicle, WeatherState initial_weather,
                               DriftSpec drift, std::uint64_t seed, PerceptionConfig cfg)
    : bus_(bus),
      weather_sub_(bus.register_subscriber(kNodeId, bus::TopicName(bus::topics::kWeatherControl))),
      vehicle_sub_(bus.register_subscriber(kNodeId, bus::TopicName(bus::topics::kVehicleState))),
      detections_pub_(bus.register_publisher(kNodeId, bus::TopicName(bus::topics::kDetections))),
      scene_(std::move(scene)),
      vehicle_(initial_vehicle),
      weather_(initial_weather),
      drift_(std::move(drift)),
      rng_(seed),
      cfg_(cfg) {
  for (const auto& obj : scene_) validate(obj);
  validate(weather_);
  validate(drift_);
}

DetectionMsg PerceptionNode::tick(double now) {
  for (auto& env : bus_.drain(weather_sub_)) {
    if (const auto* msg = std::get_if<WeatherMsg>(&env.payload)) weather_ = msg->weather;
  }
  for (auto& env : bus_.drain(vehicle_sub_)) {
    if (const auto* msg = std::get_if<VehicleStateMsg>(&env.payload)) vehicle_ = msg->state;
  }
  DetectionMsg frame{now, sense(vehicle_, scene_, weather_, drift_, rng_, now, cfg_)};
  bus_.publish(detections_pub_, frame, now);
  return frame;
}

}  // namespace drivebridge::perception
