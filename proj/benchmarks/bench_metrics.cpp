#include <benchmark/benchmark.h>

#include <random>

#include "drivebridge/metrics.hpp"

using namespace drivebridge;
using namespace drivebridge::metrics;

namespace {

struct Workload {
  std::vector<ScoredDetection> dets;
  std::vector<GroundTruth> truths;
};

Workload make_workload(int frames, int per_frame) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.1, 0.9);
  std::normal_distribution<double> jitter(0.0, 0.01);
  std::uniform_real_distribution<double> conf(0.3, 1.0);
  Workload w;
  for (int f = 0; f < frames; ++f) {
    for (int i = 0; i < per_frame; ++i) {
      const double cx = pos(rng), cy = pos(rng);
      const int cls = i % 3;
      w.truths.push_back({f, cls, Box::from_center({cx, cy, 0.05, 0.05})});
      w.dets.push_back({f, cls, conf(rng),
                        Box::from_center({cx + jitter(rng), cy + jitter(rng), 0.05, 0.05})});
      w.dets.push_back({f, cls, conf(rng) * 0.5, Box::from_center({pos(rng), pos(rng), 0.05, 0.05})});
    }
  }
  return w;
}

}  // namespace

static void BM_Match(benchmark::State& state) {
  const auto w = make_workload(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(match_detections(w.dets, w.truths, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.dets.size()));
}
BENCHMARK(BM_Match)->Arg(100)->Arg(1000);

static void BM_Map50_95(benchmark::State& state) {
  const auto w = make_workload(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(map50_95(w.dets, w.truths));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.dets.size()));
}
BENCHMARK(BM_Map50_95)->Arg(100)->Arg(1000);
