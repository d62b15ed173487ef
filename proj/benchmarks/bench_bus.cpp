#include <benchmark/benchmark.h>

#include "drivebridge/bus.hpp"

using namespace drivebridge;
using namespace drivebridge::bus;

static void BM_PublishDrain(benchmark::State& state) {
  const auto subscribers = static_cast<int>(state.range(0));
  Bus bus;
  const TopicName topic("/set_speed");
  const auto pub = bus.register_publisher("bench_pub", topic);
  std::vector<SubscriptionHandle> subs;
  for (int i = 0; i < subscribers; ++i) {
    subs.push_back(bus.register_subscriber("sub" + std::to_string(i), topic, 64));
  }
  double now = 0.0;
  for (auto _ : state) {
    bus.publish(pub, SetSpeedMsg{13.7, now}, now);
    for (const auto& s : subs) benchmark::DoNotOptimize(bus.take(s));
    now += 0.1;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PublishDrain)->Arg(1)->Arg(4)->Arg(16);

static void BM_PublishOverflow(benchmark::State& state) {
  Bus bus;
  const TopicName topic("/set_speed");
  const auto pub = bus.register_publisher("bench_pub", topic);
  bus.register_subscriber("slow", topic, 16);
  double now = 0.0;
  for (auto _ : state) {
    bus.publish(pub, SetSpeedMsg{13.7, now}, now);
    now += 0.1;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PublishOverflow);
