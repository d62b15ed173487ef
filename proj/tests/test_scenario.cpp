#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drivebridge/metrics.hpp"
#include "drivebridge/scenario.hpp"
#include "drivebridge/units.hpp"

using namespace drivebridge;
using namespace drivebridge::scenario;

#ifndef DRIVEBRIDGE_SCENARIO_DIR
#error "DRIVEBRIDGE_SCENARIO_DIR must be defined"
#endif

namespace {

const char* kMinimal =
    "[scenario]\n"
    "seed = 1\n"
    "duration_s = 10\n"
    "initial_speed_kmh = 30\n";

std::string with(const std::string& extra) { return std::string(kMinimal) + extra; }

template <typename E>
void expect_error(const std::string& text) {
  EXPECT_THROW(load_scenario(text), E) << text;
}

}  // namespace

TEST(LoadScenario, MinimalSpecUsesDefaults) {
  const auto spec = load_scenario(kMinimal);
  EXPECT_EQ(spec.seed, 1u);
  EXPECT_EQ(spec.duration_s, 10.0);
  EXPECT_EQ(spec.initial_speed_kmh, 30.0);
  EXPECT_EQ(spec.tick_hz, 10.0);
  EXPECT_EQ(spec.mapping, controller::SpeedMapping{});
  EXPECT_EQ(spec.mapping.entries_kmh().at(30), 25.0);
  EXPECT_EQ(spec.mapping.entries_kmh().at(90), 80.0);
  EXPECT_TRUE(std::holds_alternative<perception::NoDrift>(spec.drift));
}

TEST(LoadScenario, MissingRequiredKey) {
  try {
    load_scenario("[scenario]\nseed = 1\nduration_s = 5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.field().find("initial_speed_kmh"), std::string::npos);
  }
}

TEST(LoadScenario, ParseErrorsCarryLine) {
  try {
    load_scenario(with("\n[object.0]\nclass = speed_limit_30\nposition_m = abc\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 8u);
    EXPECT_NE(e.field().find("position_m"), std::string::npos);
  }
}

TEST(LoadScenario, RejectsUnknownThings) {
  expect_error<ParseError>(with("bogus = 1\n"));
  expect_error<ParseError>(with("[nope]\n"));
  expect_error<ParseError>(with("[object.x]\n"));
  expect_error<ParseError>(with("[object.0]\nclass = stop_sign\nposition_m = 5\n"));
  expect_error<ParseError>(with("[drift]\nkind = Sideways\n"));
  expect_error<ParseError>(with("[mapping]\nfast = 20\n"));
  expect_error<ParseError>(with("seed = 2\n"));
  expect_error<ParseError>("seed = 1\n");
  expect_error<ParseError>("");
}

TEST(LoadScenario, ValidationErrors) {
  expect_error<ValidationError>(with("[weather.0]\ntime_s = 10\ncondition = Fog\n"
                                     "[weather.1]\ntime_s = 5\ncondition = Clear\n"));
  expect_error<ValidationError>(with("[mapping]\n30 = 40\n"));
  expect_error<ValidationError>(with("[drift]\nkind = Covariate\nmiss_rate_boost = 1.5\n"));
  expect_error<ValidationError>("[scenario]\nseed = 1\nduration_s = 0\ninitial_speed_kmh = 30\n");
  expect_error<ValidationError>(with("[object.0]\nclass = speed_limit_30\nposition_m = 5000\n"));
  expect_error<ValidationError>(with("[setpoint.0]\ntime_s = 3\nspeed_kmh = 40\n"
                                     "[setpoint.1]\ntime_s = 3\nspeed_kmh = 50\n"));
}

TEST(LoadScenario, NumberedSectionsOrderedByIndex) {
  const auto spec = load_scenario(with("[object.2]\nclass = speed_limit_90\nposition_m = 300\n"
                                       "[object.1]\nclass = speed_limit_30\nposition_m = 100\n"));
  ASSERT_EQ(spec.objects.size(), 2u);
  EXPECT_EQ(spec.objects[0].position, 100.0);
  EXPECT_EQ(spec.objects[1].position, 300.0);
}

TEST(LoadScenario, DriftSections) {
  const auto relabeled = load_scenario(with("[drift]\nkind = Concept\nrelabel.speed_limit_30 = speed_limit_90\n"));
  const auto& c = std::get<perception::ConceptDrift>(relabeled.drift);
  EXPECT_EQ(c.relabel[0], ObjectClass::SpeedLimit90);
  EXPECT_EQ(c.relabel[1], ObjectClass::SpeedLimit90);

  const auto prior = load_scenario(with("[drift]\nkind = PriorShift\nweight.speed_limit_90 = 0.25\n"));
  const auto& p = std::get<perception::PriorShiftDrift>(prior.drift);
  EXPECT_EQ(p.weights[1], 0.25);
  EXPECT_EQ(p.weights[0], 1.0);
}

TEST(PaperReplica, MappingWeatherAndValidity) {
  const auto spec = paper_replica_spec();
  EXPECT_EQ(spec.mapping.entries_kmh().at(30), 25.0);
  EXPECT_EQ(spec.mapping.entries_kmh().at(90), 80.0);
  ASSERT_EQ(spec.objects.size(), 2u);
  ASSERT_EQ(spec.weather_schedule.size(), 2u);
  EXPECT_EQ(spec.weather_schedule[0].weather.condition, WeatherCondition::Fog);
  EXPECT_EQ(spec.weather_schedule[0].time_s, 0.0);
  EXPECT_EQ(spec.weather_schedule[1].weather.condition, WeatherCondition::Clear);
  EXPECT_NO_THROW(validate(spec));
}

TEST(PaperReplica, FogDuringThirtySignApproach) {
  const auto spec = paper_replica_spec();
  const auto out = run(spec);
  std::optional<double> first_thirty;
  for (const auto& rec : out.trace) {
    if (const auto* d = std::get_if<trace::DetectionEvent>(&rec.payload)) {
      if (d->object_class == ObjectClass::SpeedLimit30 && d->confidence >= spec.confidence_threshold) {
        first_thirty = rec.time;
        break;
      }
    }
  }
  ASSERT_TRUE(first_thirty);
  EXPECT_LT(*first_thirty, spec.weather_schedule[1].time_s);
}

TEST(PaperReplica, ShippedFileMatchesBuiltin) {
  EXPECT_EQ(load_scenario_file(std::string(DRIVEBRIDGE_SCENARIO_DIR) + "/paper_replica.ini"),
            paper_replica_spec());
}

TEST(PaperReplica, NinetySignResponseUnderFiveSeconds) {
  const auto spec = paper_replica_spec();
  const auto out = run(spec);
  const auto lat = metrics::response_latency(out.trace, spec.mapping, spec.confidence_threshold);
  std::optional<double> effect;
  for (const auto& s : lat.samples) {
    if (std::abs(s.new_target - kmh_to_mps(80.0)) < 1e-9) effect = s.effect_stamp;
  }
  ASSERT_TRUE(effect);
  const auto stats = metrics::speed_profile_stats(metrics::speed_samples(out.trace), kmh_to_mps(80.0),
                                                  kmh_to_mps(1.0), *effect);
  ASSERT_TRUE(stats.settling_time);
  EXPECT_LE(*stats.settling_time, 5.0);
}

TEST(Run, TickCount) {
  const auto out = run(load_scenario(kMinimal));
  EXPECT_EQ(trace::vehicle_samples(out.trace).size(), 100u);
  const auto samples = trace::vehicle_samples(out.trace);
  EXPECT_NEAR(samples.back().first, 10.0, 1e-12);
}

TEST(Run, DeterministicPerSeed) {
  for (const auto& name : builtin_names()) {
    const auto spec = *builtin_spec(name);
    EXPECT_EQ(trace::to_csv(run(spec).trace), trace::to_csv(run(spec).trace)) << name;
  }
}

TEST(Run, SeedChangesStochasticTrace) {
  auto spec = *builtin_spec("fog-covariate");
  const auto a = trace::to_csv(run(spec).trace);
  spec.seed += 1;
  EXPECT_NE(a, trace::to_csv(run(spec).trace));
}

TEST(Run, TimesNonDecreasingAndInvariantsHold) {
  for (const auto& name : builtin_names()) {
    const auto out = run(*builtin_spec(name));
    double prev = -1.0;
    for (const auto& rec : out.trace) {
      ASSERT_GE(rec.time, prev) << name;
      prev = rec.time;
      if (const auto* v = std::get_if<trace::VehicleSample>(&rec.payload)) {
        ASSERT_GE(v->speed, 0.0);
        ASSERT_LE(std::abs(v->acceleration), 6.0);
      }
      if (const auto* c = std::get_if<trace::CommandEvent>(&rec.payload)) {
        ASSERT_EQ(c->steering, 0.0);
      }
    }
  }
}

TEST(Run, ObstacleStopsVehicle) {
  const auto out = run(*builtin_spec("obstacle-stop"));
  const auto samples = trace::vehicle_samples(out.trace);
  double min_speed = 1e9;
  for (const auto& [t, s] : samples) min_speed = std::min(min_speed, s.speed);
  EXPECT_LT(min_speed, 0.5);
}

TEST(Run, ConceptDriftSpeedsUpAtThirtySigns) {
  const auto spec = *builtin_spec("concept-drift");
  const auto out = run(spec);
  for (const auto& rec : out.trace) {
    if (const auto* d = std::get_if<trace::DetectionEvent>(&rec.payload)) {
      EXPECT_NE(d->object_class, ObjectClass::SpeedLimit30);
    }
  }
}

TEST(Run, UnknownBuiltin) { EXPECT_FALSE(builtin_spec("nope")); }

TEST(ToText, BuiltinsRoundTrip) {
  for (const auto& name : builtin_names()) {
    const auto spec = *builtin_spec(name);
    EXPECT_EQ(load_scenario(to_text(spec)), spec) << name;
  }
}

TEST(ToText, RandomSpecsRoundTrip) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    ScenarioSpec spec;
    spec.name = "random-" + std::to_string(i);
    spec.seed = rng();
    spec.duration_s = 1.0 + 100.0 * u(rng);
    spec.tick_hz = 5.0 + 20.0 * u(rng);
    spec.initial_speed_kmh = 90.0 * u(rng);
    spec.track_length_m = 500.0 + 1000.0 * u(rng);
    const int objects = static_cast<int>(rng() % 5);
    for (int k = 0; k < objects; ++k) {
      spec.objects.push_back({static_cast<ObjectClass>(rng() % 3), 400.0 * u(rng), 0.1 + u(rng),
                              0.1 + u(rng)});
    }
    double t = 0.0;
    const int phases = static_cast<int>(rng() % 3);
    for (int k = 0; k < phases; ++k) {
      const bool fog = rng() % 2 == 0;
      spec.weather_schedule.push_back(
          {t, {fog ? WeatherCondition::Fog : WeatherCondition::Clear, 20.0 + 200.0 * u(rng),
               90.0 * u(rng)}});
      t += 1.0 + 10.0 * u(rng);
    }
    if (rng() % 2) spec.setpoints.push_back({5.0 * u(rng), 100.0 * u(rng)});
    switch (rng() % 4) {
      case 1:
        spec.drift = perception::CovariateDrift{0.1 + 0.9 * u(rng), 0.9 * u(rng), u(rng)};
        break;
      case 2:
        spec.drift = perception::PriorShiftDrift{{u(rng) + 0.01, u(rng), u(rng)}};
        break;
      case 3: {
        perception::ConceptDrift c;
        c.relabel[rng() % 3] = static_cast<ObjectClass>(rng() % 3);
        spec.drift = c;
        break;
      }
      default:
        break;
    }
    spec.mapping.set(30, 1.0 + 29.0 * u(rng));
    spec.confidence_threshold = u(rng);
    spec.hold_time_s = 5.0 * u(rng);
    spec.queue_capacity = 1 + rng() % 64;
    spec.perception.confidence_std = 0.1 * u(rng);
    spec.perception.bbox_jitter_sigma = 0.1 * u(rng);
    ASSERT_NO_THROW(validate(spec)) << to_text(spec);
    ASSERT_EQ(load_scenario(to_text(spec)), spec) << to_text(spec);
  }
}
