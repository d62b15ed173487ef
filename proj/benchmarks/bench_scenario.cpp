#include <benchmark/benchmark.h>

#include "drivebridge/scenario.hpp"

using namespace drivebridge;

static void BM_RunBuiltin(benchmark::State& state, const char* name) {
  const auto spec = scenario::builtin_spec(name).value();
  for (auto _ : state) benchmark::DoNotOptimize(scenario::run(spec));
}
BENCHMARK_CAPTURE(BM_RunBuiltin, paper_replica, "paper-replica")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RunBuiltin, fog_covariate, "fog-covariate")->Unit(benchmark::kMillisecond);
