#pragma once

// Detection scoring and closed-loop response measurements.
//
// Detection scoring follows the COCO conventions: detections are ranked by
// confidence (ties keep stream order) and each one greedily claims the
// unmatched same-class, same-frame truth with the highest IoU at or above the
// threshold. Average precision uses 101-point interpolation over recall.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "drivebridge/controller.hpp"
#include "drivebridge/messages.hpp"
#include "drivebridge/trace.hpp"

namespace drivebridge::metrics {

/// Axis-aligned box in corner form.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  static Box from_center(const BBox& b);
  double area() const { return (x2 - x1) * (y2 - y1); }

  bool operator==(const Box&) const = default;
};

/// Intersection over union. Throws std::invalid_argument if either box has
/// zero or negative area.
double iou(const Box& a, const Box& b);

struct ScoredDetection {
  std::int64_t frame = 0;
  int class_id = 0;
  double confidence = 0.0;
  Box box;
};

struct GroundTruth {
  std::int64_t frame = 0;
  int class_id = 0;
  Box box;
};

struct MatchedPair {
  std::size_t detection = 0;
  std::size_t truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::vector<MatchedPair> pairs;
  std::vector<bool> detection_matched;  // indexed like the input detections
};

/// Throws std::invalid_argument unless 0 < iou_threshold <= 1.
MatchResult match_detections(const std::vector<ScoredDetection>& dets,
                             const std::vector<GroundTruth>& truths, double iou_threshold);

/// Pools all classes into one ranking; matching stays class-gated. Returns 0
/// when there are no truths.
double average_precision(const std::vector<ScoredDetection>& dets,
                         const std::vector<GroundTruth>& truths, double iou_threshold);

/// Mean of per-class AP over the classes that have at least one truth.
double mean_average_precision(const std::vector<ScoredDetection>& dets,
                              const std::vector<GroundTruth>& truths, double iou_threshold);

/// mAP averaged over IoU thresholds 0.50, 0.55, ..., 0.95.
double map50_95(const std::vector<ScoredDetection>& dets, const std::vector<GroundTruth>& truths);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double map50 = 0.0;
  double map50_95 = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// Precision and recall at IoU 0.5, both 0 when their denominator is 0.
MetricsReport evaluate(const std::vector<ScoredDetection>& dets,
                       const std::vector<GroundTruth>& truths);

double f1_score(double precision, double recall);

std::string to_json(const MetricsReport& report);
std::string csv_header();
std::string to_csv_row(const MetricsReport& report);

/// Converts a trace and its ground-truth file into scoring inputs. Frames are
/// keyed on the record timestamp in microseconds.
std::int64_t frame_key(double time);
std::vector<ScoredDetection> detections_from_trace(const trace::Trace& trace);
std::vector<GroundTruth> truths_from_rows(const std::vector<trace::TruthRow>& rows);

struct LatencySample {
  double trigger_stamp = 0.0;
  double effect_stamp = 0.0;
  double latency = 0.0;
  double new_target = 0.0;
};

struct LatencyReport {
  std::vector<LatencySample> samples;
  // Stamps of target changes with no detection or setpoint explaining them,
  // e.g. a stop being released after its hold time.
  std::vector<double> anomalies;
  // Target changes caused by an operator setpoint; not perception latency.
  std::size_t setpoint_changes = 0;

  double max_latency() const;
};

/// Target the controller would adopt from a detection, ignoring its current
/// mode; nullopt below the gate or for unmapped limits.
std::optional<double> implied_target(ObjectClass cls, double confidence,
                                     const controller::SpeedMapping& mapping,
                                     double confidence_threshold);

/// Pairs each change of commanded target speed with the earliest gate-passing
/// detection since the previous change that implies the new target.
LatencyReport response_latency(const trace::Trace& trace, const controller::SpeedMapping& mapping,
                               double confidence_threshold);

struct SpeedSample {
  double time = 0.0;
  double speed = 0.0;
};

struct ProfileStats {
  std::optional<double> settling_time;  // relative to the window start
  double overshoot = 0.0;               // >= 0, same units as the speeds
};

/// Looks at samples with window_start <= time < window_end. Settling is the
/// first sample time after which every sample stays within epsilon of the
/// target; overshoot is the largest excursion past the target on the far side
/// from the first sample.
ProfileStats speed_profile_stats(const std::vector<SpeedSample>& samples, double v_target,
                                 double epsilon, double window_start,
                                 double window_end = std::numeric_limits<double>::infinity());

std::vector<SpeedSample> speed_samples(const trace::Trace& trace);

}  // namespace drivebridge::metrics
