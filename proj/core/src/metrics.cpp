#include "drivebridge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace drivebridge::metrics {

namespace {

constexpr int kRecallPoints = 101;
constexpr double kTargetTolerance = 1e-9;

std::vector<std::size_t> confidence_order(const std::vector<ScoredDetection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });
  return order;
}

// 101-point interpolated AP from per-rank TP flags.
double interpolated_ap(const std::vector<bool>& tp_in_rank_order, std::size_t num_truths) {
  if (num_truths == 0) return 0.0;
  const std::size_t n = tp_in_rank_order.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tp_in_rank_order[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_truths);
  }
  // Precision envelope: max precision at any rank with recall >= this one.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double r = static_cast<double>(k) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

}  // namespace

Box Box::from_center(const BBox& b) {
  return Box{b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0};
}

double iou(const Box& a, const Box& b) {
  if (!(a.x2 > a.x1 && a.y2 > a.y1) || !(b.x2 > b.x1 && b.y2 > b.y1)) {
    throw std::invalid_argument("iou: boxes must have positive area");
  }
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

MatchResult match_detections(const std::vector<ScoredDetection>& dets,
                             const std::vector<GroundTruth>& truths, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("iou_threshold must be in (0, 1]");
  }
  std::map<std::pair<std::int64_t, int>, std::vector<std::size_t>> truths_by_key;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    truths_by_key[{truths[t].frame, truths[t].class_id}].push_back(t);
  }

  MatchResult result;
  result.detection_matched.assign(dets.size(), false);
  std::vector<bool> truth_taken(truths.size(), false);

  for (std::size_t d : confidence_order(dets)) {
    auto it = truths_by_key.find({dets[d].frame, dets[d].class_id});
    if (it == truths_by_key.end()) continue;
    std::optional<std::size_t> best;
    double best_iou = iou_threshold;
    for (std::size_t t : it->second) {
      if (truth_taken[t]) continue;
      const double v = iou(dets[d].box, truths[t].box);
      if (v > best_iou || (v == best_iou && !best)) {
        best = t;
        best_iou = v;
      }
    }
    if (best) {
      truth_taken[*best] = true;
      result.detection_matched[d] = true;
      result.pairs.push_back({d, *best, best_iou});
    }
  }
  result.true_positives = result.pairs.size();
  result.false_positives = dets.size() - result.true_positives;
  result.false_negatives = truths.size() - result.true_positives;
  return result;
}

double average_precision(const std::vector<ScoredDetection>& dets,
                         const std::vector<GroundTruth>& truths, double iou_threshold) {
  const MatchResult m = match_detections(dets, truths, iou_threshold);
  std::vector<bool> ranked;
  ranked.reserve(dets.size());
  for (std::size_t d : confidence_order(dets)) ranked.push_back(m.detection_matched[d]);
  return interpolated_ap(ranked, truths.size());
}

double mean_average_precision(const std::vector<ScoredDetection>& dets,
                              const std::vector<GroundTruth>& truths, double iou_threshold) {
  std::set<int> classes;
  for (const auto& t : truths) classes.insert(t.class_id);
  if (classes.empty()) return 0.0;
  double sum = 0.0;
  for (int c : classes) {
    std::vector<ScoredDetection> cd;
    std::vector<GroundTruth> ct;
    std::copy_if(dets.begin(), dets.end(), std::back_inserter(cd),
                 [c](const auto& d) { return d.class_id == c; });
    std::copy_if(truths.begin(), truths.end(), std::back_inserter(ct),
                 [c](const auto& t) { return t.class_id == c; });
    sum += average_precision(cd, ct, iou_threshold);
  }
  return sum / static_cast<double>(classes.size());
}

double map50_95(const std::vector<ScoredDetection>& dets, const std::vector<GroundTruth>& truths) {
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) {
    sum += mean_average_precision(dets, truths, 0.5 + 0.05 * k);
  }
  return sum / 10.0;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

MetricsReport evaluate(const std::vector<ScoredDetection>& dets,
                       const std::vector<GroundTruth>& truths) {
  const MatchResult m = match_detections(dets, truths, 0.5);
  MetricsReport r;
  r.true_positives = m.true_positives;
  r.false_positives = m.false_positives;
  r.false_negatives = m.false_negatives;
  const auto tp = static_cast<double>(m.true_positives);
  if (!dets.empty()) r.precision = tp / static_cast<double>(dets.size());
  if (!truths.empty()) r.recall = tp / static_cast<double>(truths.size());
  r.f1 = f1_score(r.precision, r.recall);
  r.map50 = mean_average_precision(dets, truths, 0.5);
  r.map50_95 = map50_95(dets, truths);
  return r;
}

std::string to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["map50"] = r.map50;
  j["map50_95"] = r.map50_95;
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["false_negatives"] = r.false_negatives;
  return j.dump(2);
}

std::string csv_header() { return "precision,recall,f1,map50,map50_95,tp,fp,fn"; }

std::string to_csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os << trace::format_number(r.precision) << ',' << trace::format_number(r.recall) << ','
     << trace::format_number(r.f1) << ',' << trace::format_number(r.map50) << ','
     << trace::format_number(r.map50_95) << ',' << r.true_positives << ',' << r.false_positives
     << ',' << r.false_negatives;
  return os.str();
}

std::int64_t frame_key(double time) { return std::llround(time * 1e6); }

std::vector<ScoredDetection> detections_from_trace(const trace::Trace& tr) {
  std::vector<ScoredDetection> out;
  for (const auto& rec : tr) {
    if (const auto* d = std::get_if<trace::DetectionEvent>(&rec.payload)) {
      out.push_back({frame_key(rec.time), class_id(d->object_class), d->confidence,
                     Box::from_center(d->bbox)});
    }
  }
  return out;
}

std::vector<GroundTruth> truths_from_rows(const std::vector<trace::TruthRow>& rows) {
  std::vector<GroundTruth> out;
  out.reserve(rows.size());
  for (const auto& t : rows) {
    out.push_back({frame_key(t.time), class_id(t.object_class), Box::from_center(t.bbox)});
  }
  return out;
}

double LatencyReport::max_latency() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.latency);
  return m;
}

std::optional<double> implied_target(ObjectClass cls, double confidence,
                                     const controller::SpeedMapping& mapping,
                                     double confidence_threshold) {
  if (confidence < confidence_threshold) return std::nullopt;
  if (cls == ObjectClass::Obstacle) return 0.0;
  const auto limit = posted_limit_kmh(cls);
  return limit ? mapping.target_mps(*limit) : std::nullopt;
}

LatencyReport response_latency(const trace::Trace& tr, const controller::SpeedMapping& mapping,
                               double confidence_threshold) {
  struct Pending {
    double stamp;
    double target;
  };
  auto same = [](double a, double b) { return std::abs(a - b) <= kTargetTolerance; };

  LatencyReport report;
  std::optional<double> current;
  std::vector<Pending> detections;
  std::vector<Pending> setpoints;

  for (const auto& rec : tr) {
    if (const auto* d = std::get_if<trace::DetectionEvent>(&rec.payload)) {
      const auto target = implied_target(d->object_class, d->confidence, mapping,
                                         confidence_threshold);
      if (target && !(current && same(*target, *current))) {
        detections.push_back({rec.time, *target});
      }
    } else if (const auto* s = std::get_if<trace::SetpointEvent>(&rec.payload)) {
      setpoints.push_back({rec.time, s->speed});
    } else if (const auto* c = std::get_if<trace::CommandEvent>(&rec.payload)) {
      if (!current) {
        current = c->target_speed;
        detections.clear();
        setpoints.clear();
        continue;
      }
      if (same(c->target_speed, *current)) continue;

      auto match = [&](const std::vector<Pending>& list) {
        return std::find_if(list.begin(), list.end(),
                            [&](const Pending& p) { return same(p.target, c->target_speed); });
      };
      if (auto it = match(detections); it != detections.end()) {
        report.samples.push_back({it->stamp, rec.time, rec.time - it->stamp, c->target_speed});
      } else if (match(setpoints) != setpoints.end()) {
        ++report.setpoint_changes;
      } else {
        report.anomalies.push_back(rec.time);
      }
      current = c->target_speed;
      detections.clear();
      setpoints.clear();
    }
  }
  return report;
}

ProfileStats speed_profile_stats(const std::vector<SpeedSample>& samples, double v_target,
                                 double epsilon, double window_start, double window_end) {
  ProfileStats stats;
  std::optional<double> first_speed;
  std::optional<std::size_t> settle_index;
  double settle_time = 0.0;
  bool inside = false;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.time < window_start || s.time >= window_end) continue;
    if (!first_speed) first_speed = s.speed;

    const double excess =
        *first_speed <= v_target ? s.speed - v_target : v_target - s.speed;
    stats.overshoot = std::max(stats.overshoot, excess);

    const bool within = std::abs(s.speed - v_target) <= epsilon;
    if (within && !inside) {
      settle_index = i;
      settle_time = s.time;
    }
    inside = within;
  }
  if (inside && settle_index) stats.settling_time = settle_time - window_start;
  return stats;
}

std::vector<SpeedSample> speed_samples(const trace::Trace& tr) {
  std::vector<SpeedSample> out;
  for (const auto& [time, sample] : trace::vehicle_samples(tr)) out.push_back({time, sample.speed});
  return out;
}

}  // namespace drivebridge::metrics
