#include "drivebridge/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "drivebridge/bus.hpp"
#include "drivebridge/plant.hpp"
#include "drivebridge/sim_clock.hpp"
#include "drivebridge/units.hpp"

namespace drivebridge::scenario {

namespace {

using perception::ConceptDrift;
using perception::CovariateDrift;
using perception::NoDrift;
using perception::PriorShiftDrift;
using perception::SceneObject;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Value {
  std::string text;
  std::size_t line = 0;
};

// Keys of one section, remembering where each came from for diagnostics.
struct Section {
  std::size_t header_line = 0;
  std::map<std::string, Value> keys;
};

class Reader {
 public:
  Reader(const Section& section, std::string prefix) : s_(section), prefix_(std::move(prefix)) {}

  bool has(const std::string& key) const { return s_.keys.count(key) != 0; }

  double number(const std::string& key) const { return parse_number(key, get(key)); }

  std::optional<double> number_or(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::uint64_t uint(const std::string& key) const {
    const Value& v = get(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc{} || ptr != v.text.data() + v.text.size()) {
      throw ParseError(v.line, field(key), "expected a non-negative integer, got '" + v.text + "'");
    }
    return out;
  }

  const std::string& text(const std::string& key) const { return get(key).text; }
  std::size_t line_of(const std::string& key) const { return get(key).line; }
  std::string field(const std::string& key) const { return prefix_ + "." + key; }

  const Value& get(const std::string& key) const {
    auto it = s_.keys.find(key);
    if (it == s_.keys.end()) {
      throw ParseError(s_.header_line, field(key), "missing required key");
    }
    return it->second;
  }

  double parse_number(const std::string& key, const Value& v) const {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc{} || ptr != v.text.data() + v.text.size()) {
      throw ParseError(v.line, field(key), "expected a number, got '" + v.text + "'");
    }
    return out;
  }

  // Rejects keys outside `allowed` (exact names or "prefix." wildcards).
  void check_keys(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : s_.keys) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](std::string_view a) {
        if (!a.empty() && a.back() == '.') return key.rfind(a, 0) == 0;
        return key == a;
      });
      if (!ok) throw ParseError(value.line, field(key), "unknown key");
    }
  }

 private:
  const Section& s_;
  std::string prefix_;
};

ObjectClass parse_object_class(const Reader& r, const std::string& key) {
  auto cls = object_class_from_name(r.text(key));
  if (!cls) throw ParseError(r.line_of(key), r.field(key), "unknown class '" + r.text(key) + "'");
  return *cls;
}

ObjectClass class_from_suffix(const std::string& key, std::size_t line, const std::string& field) {
  const auto dot = key.find('.');
  auto cls = object_class_from_name(std::string_view(key).substr(dot + 1));
  if (!cls) throw ParseError(line, field, "unknown class in key '" + key + "'");
  return *cls;
}

perception::DriftSpec parse_drift(const Section& section) {
  Reader r(section, "drift");
  const std::string& kind = r.text("kind");
  if (kind == "None") {
    r.check_keys({"kind"});
    return NoDrift{};
  }
  if (kind == "Covariate") {
    r.check_keys({"kind", "confidence_scale", "miss_rate_boost", "bbox_jitter_sigma"});
    CovariateDrift d;
    d.confidence_scale = r.number_or("confidence_scale").value_or(1.0);
    d.miss_rate_boost = r.number_or("miss_rate_boost").value_or(0.0);
    d.bbox_jitter_sigma = r.number_or("bbox_jitter_sigma").value_or(0.0);
    return d;
  }
  if (kind == "PriorShift") {
    r.check_keys({"kind", "weight."});
    PriorShiftDrift d;
    for (const auto& [key, value] : section.keys) {
      if (key == "kind") continue;
      const auto cls = class_from_suffix(key, value.line, r.field(key));
      d.weights[class_id(cls)] = r.parse_number(key, value);
    }
    return d;
  }
  if (kind == "Concept") {
    r.check_keys({"kind", "relabel."});
    ConceptDrift d;
    for (const auto& [key, value] : section.keys) {
      if (key == "kind") continue;
      const auto from = class_from_suffix(key, value.line, r.field(key));
      auto to = object_class_from_name(value.text);
      if (!to) throw ParseError(value.line, r.field(key), "unknown class '" + value.text + "'");
      d.relabel[class_id(from)] = *to;
    }
    return d;
  }
  throw ParseError(r.line_of("kind"), "drift.kind", "unknown drift kind '" + kind + "'");
}

struct ParsedText {
  std::map<std::string, Section> plain;
  std::map<std::string, std::map<int, Section>> numbered;
};

ParsedText parse_sections(std::string_view text) {
  static const std::vector<std::string> kPlain = {"scenario", "drift", "mapping", "perception"};
  static const std::vector<std::string> kNumbered = {"object", "weather", "setpoint"};

  ParsedText out;
  Section* current = nullptr;
  std::string current_name;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, std::string(line), "unterminated section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      const auto dot = name.find('.');
      if (dot == std::string::npos) {
        if (std::find(kPlain.begin(), kPlain.end(), name) == kPlain.end()) {
          throw ParseError(lineno, name, "unknown section");
        }
        if (out.plain.count(name)) throw ParseError(lineno, name, "duplicate section");
        current = &out.plain[name];
      } else {
        const std::string base = name.substr(0, dot);
        const std::string index = name.substr(dot + 1);
        if (std::find(kNumbered.begin(), kNumbered.end(), base) == kNumbered.end()) {
          throw ParseError(lineno, name, "unknown section");
        }
        int n = 0;
        auto [ptr, ec] = std::from_chars(index.data(), index.data() + index.size(), n);
        if (ec != std::errc{} || ptr != index.data() + index.size() || n < 0) {
          throw ParseError(lineno, name, "section index must be a non-negative integer");
        }
        if (out.numbered[base].count(n)) throw ParseError(lineno, name, "duplicate section");
        current = &out.numbered[base][n];
      }
      current->header_line = lineno;
      current_name = name;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(lineno, current_name, "expected 'key = value'");
    }
    if (!current) throw ParseError(lineno, std::string(line), "key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(lineno, current_name, "empty key");
    if (current->keys.count(key)) {
      throw ParseError(lineno, current_name + "." + key, "duplicate key");
    }
    current->keys[key] = Value{value, lineno};
  }
  return out;
}

// Feeds every envelope on the scenario topics into the trace, in publish order.
class TraceRecorder {
 public:
  explicit TraceRecorder(bus::Bus& bus) : bus_(bus) {
    for (const char* topic : {bus::topics::kWeatherControl, bus::topics::kSetSpeed,
                              bus::topics::kDetections, bus::topics::kAckermannCmd,
                              bus::topics::kVehicleState}) {
      subs_.push_back(bus.register_subscriber(kNodeId, bus::TopicName(topic), kCapacity));
    }
  }

  // Called after each pipeline stage; only one topic is active per stage, so
  // draining topics in a fixed order preserves publish order.
  void collect(trace::Trace& out) {
    for (auto sub : subs_) {
      for (auto& env : bus_.drain(sub)) append(env, out);
    }
  }

  static constexpr const char* kNodeId = "trace_recorder";

 private:
  static constexpr std::size_t kCapacity = 1024;

  static void append(const bus::MessageEnvelope& env, trace::Trace& out) {
    const double t = env.publish_time;
    if (const auto* w = std::get_if<WeatherMsg>(&env.payload)) {
      out.push_back({t, trace::WeatherEvent{w->weather, env.seq}});
    } else if (const auto* s = std::get_if<SetSpeedMsg>(&env.payload)) {
      out.push_back({t, trace::SetpointEvent{s->speed, env.seq}});
    } else if (const auto* f = std::get_if<DetectionMsg>(&env.payload)) {
      for (const auto& d : f->detections) {
        out.push_back({t, trace::DetectionEvent{d.object_class, d.confidence, d.bbox, d.truth_id,
                                                env.seq}});
      }
    } else if (const auto* c = std::get_if<DriveCommand>(&env.payload)) {
      out.push_back({t, trace::CommandEvent{c->target_speed, c->accel, c->steering, env.seq}});
    } else if (const auto* v = std::get_if<VehicleStateMsg>(&env.payload)) {
      out.push_back({v->state.time, trace::VehicleSample{v->state.position, v->state.speed,
                                                         v->state.acceleration}});
    }
  }

  bus::Bus& bus_;
  std::vector<bus::SubscriptionHandle> subs_;
};

WeatherState initial_weather(const ScenarioSpec& spec) {
  if (!spec.weather_schedule.empty() && spec.weather_schedule.front().time_s <= 0.0) {
    return spec.weather_schedule.front().weather;
  }
  return WeatherState::clear();
}

}  // namespace

ParseError::ParseError(std::size_t line, std::string field, const std::string& what)
    : ScenarioError("line " + std::to_string(line) + ", field '" + field + "': " + what),
      line_(line),
      field_(std::move(field)) {}

ScenarioSpec load_scenario(std::string_view text) {
  const ParsedText parsed = parse_sections(text);
  auto plain = [&](const std::string& name) -> const Section* {
    auto it = parsed.plain.find(name);
    return it == parsed.plain.end() ? nullptr : &it->second;
  };
  auto numbered = [&](const std::string& name) -> std::map<int, Section> {
    auto it = parsed.numbered.find(name);
    return it == parsed.numbered.end() ? std::map<int, Section>{} : it->second;
  };

  ScenarioSpec spec;
  const Section* head = plain("scenario");
  if (!head) throw ParseError(0, "scenario", "missing [scenario] section");
  {
    Reader r(*head, "scenario");
    r.check_keys({"name", "seed", "duration_s", "tick_hz", "initial_speed_kmh", "track_length_m",
                  "confidence_threshold", "hold_time_s", "queue_capacity"});
    if (r.has("name")) spec.name = r.text("name");
    spec.seed = r.uint("seed");
    spec.duration_s = r.number("duration_s");
    spec.initial_speed_kmh = r.number("initial_speed_kmh");
    spec.tick_hz = r.number_or("tick_hz").value_or(spec.tick_hz);
    spec.track_length_m = r.number_or("track_length_m").value_or(spec.track_length_m);
    spec.confidence_threshold =
        r.number_or("confidence_threshold").value_or(spec.confidence_threshold);
    spec.hold_time_s = r.number_or("hold_time_s").value_or(spec.hold_time_s);
    if (r.has("queue_capacity")) spec.queue_capacity = r.uint("queue_capacity");
  }

  for (const auto& [n, section] : numbered("object")) {
    Reader r(section, "object." + std::to_string(n));
    r.check_keys({"class", "position_m", "width_m", "height_m"});
    SceneObject obj;
    obj.object_class = parse_object_class(r, "class");
    obj.position = r.number("position_m");
    obj.width_m = r.number_or("width_m").value_or(obj.width_m);
    obj.height_m = r.number_or("height_m").value_or(obj.height_m);
    spec.objects.push_back(obj);
  }

  for (const auto& [n, section] : numbered("weather")) {
    Reader r(section, "weather." + std::to_string(n));
    r.check_keys({"time_s", "condition", "visibility_m", "sun_altitude_deg"});
    auto cond = weather_condition_from_name(r.text("condition"));
    if (!cond) {
      throw ParseError(r.line_of("condition"), r.field("condition"),
                       "unknown condition '" + r.text("condition") + "'");
    }
    WeatherPhase phase;
    phase.time_s = r.number("time_s");
    phase.weather = *cond == WeatherCondition::Fog ? WeatherState::fog() : WeatherState::clear();
    phase.weather.visibility_m = r.number_or("visibility_m").value_or(phase.weather.visibility_m);
    phase.weather.sun_altitude_deg =
        r.number_or("sun_altitude_deg").value_or(phase.weather.sun_altitude_deg);
    spec.weather_schedule.push_back(phase);
  }

  for (const auto& [n, section] : numbered("setpoint")) {
    Reader r(section, "setpoint." + std::to_string(n));
    r.check_keys({"time_s", "speed_kmh"});
    spec.setpoints.push_back({r.number("time_s"), r.number("speed_kmh")});
  }

  if (const Section* drift = plain("drift")) spec.drift = parse_drift(*drift);

  if (const Section* mapping = plain("mapping")) {
    std::map<int, double> entries;
    Reader r(*mapping, "mapping");
    for (const auto& [key, value] : mapping->keys) {
      int limit = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), limit);
      if (ec != std::errc{} || ptr != key.data() + key.size()) {
        throw ParseError(value.line, r.field(key), "mapping keys must be integer km/h limits");
      }
      entries[limit] = r.parse_number(key, value);
    }
    try {
      spec.mapping = controller::SpeedMapping(entries);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
  }

  if (const Section* p = plain("perception")) {
    Reader r(*p, "perception");
    r.check_keys({"p_base_clear", "p_base_fog", "confidence_mean_clear", "confidence_mean_fog",
                  "confidence_std", "max_range_m", "bbox_jitter_sigma"});
    auto& cfg = spec.perception;
    cfg.p_base_clear = r.number_or("p_base_clear").value_or(cfg.p_base_clear);
    cfg.p_base_fog = r.number_or("p_base_fog").value_or(cfg.p_base_fog);
    cfg.confidence_mean_clear =
        r.number_or("confidence_mean_clear").value_or(cfg.confidence_mean_clear);
    cfg.confidence_mean_fog = r.number_or("confidence_mean_fog").value_or(cfg.confidence_mean_fog);
    cfg.confidence_std = r.number_or("confidence_std").value_or(cfg.confidence_std);
    cfg.max_range_m = r.number_or("max_range_m").value_or(cfg.max_range_m);
    cfg.bbox_jitter_sigma = r.number_or("bbox_jitter_sigma").value_or(cfg.bbox_jitter_sigma);
  }

  validate(spec);
  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

void validate(const ScenarioSpec& spec) {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (!(spec.duration_s > 0.0) || !std::isfinite(spec.duration_s)) fail("duration_s must be > 0");
  if (!(spec.tick_hz > 0.0) || !std::isfinite(spec.tick_hz)) fail("tick_hz must be > 0");
  if (std::llround(spec.duration_s * spec.tick_hz) < 1) fail("scenario must contain at least one tick");
  if (!(spec.initial_speed_kmh >= 0.0)) fail("initial_speed_kmh must be >= 0");
  if (!(spec.track_length_m > 0.0)) fail("track_length_m must be > 0");
  if (!(spec.confidence_threshold >= 0.0 && spec.confidence_threshold <= 1.0)) {
    fail("confidence_threshold must be in [0, 1]");
  }
  if (!(spec.hold_time_s >= 0.0)) fail("hold_time_s must be >= 0");
  if (spec.queue_capacity < 1) fail("queue_capacity must be >= 1");

  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& obj = spec.objects[i];
    try {
      perception::validate(obj);
    } catch (const std::invalid_argument& e) {
      fail("object " + std::to_string(i) + ": " + e.what());
    }
    if (obj.position > spec.track_length_m) {
      fail("object " + std::to_string(i) + " lies beyond track_length_m");
    }
  }
  for (std::size_t i = 0; i < spec.weather_schedule.size(); ++i) {
    const auto& phase = spec.weather_schedule[i];
    if (!(phase.time_s >= 0.0)) fail("weather times must be >= 0");
    if (i > 0 && !(phase.time_s > spec.weather_schedule[i - 1].time_s)) {
      fail("weather_schedule times must be strictly increasing");
    }
    try {
      perception::validate(phase.weather);
    } catch (const std::invalid_argument& e) {
      fail("weather " + std::to_string(i) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < spec.setpoints.size(); ++i) {
    const auto& sp = spec.setpoints[i];
    if (!(sp.time_s >= 0.0)) fail("setpoint times must be >= 0");
    if (!(sp.speed_kmh >= 0.0)) fail("setpoint speed must be >= 0");
    if (i > 0 && !(sp.time_s > spec.setpoints[i - 1].time_s)) {
      fail("setpoint times must be strictly increasing");
    }
  }
  try {
    perception::validate(spec.drift);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const auto& p = spec.perception;
  for (double v : {p.p_base_clear, p.p_base_fog, p.confidence_mean_clear, p.confidence_mean_fog}) {
    if (!(v >= 0.0 && v <= 1.0)) fail("perception probabilities and means must be in [0, 1]");
  }
  if (!(p.confidence_std >= 0.0) || !(p.bbox_jitter_sigma >= 0.0)) {
    fail("perception spreads must be >= 0");
  }
  if (!(p.max_range_m > 0.0)) fail("perception max_range_m must be > 0");
}

std::string to_text(const ScenarioSpec& spec) {
  using trace::format_number;
  std::ostringstream os;
  os << "[scenario]\n"
     << "name = " << spec.name << '\n'
     << "seed = " << spec.seed << '\n'
     << "duration_s = " << format_number(spec.duration_s) << '\n'
     << "tick_hz = " << format_number(spec.tick_hz) << '\n'
     << "initial_speed_kmh = " << format_number(spec.initial_speed_kmh) << '\n'
     << "track_length_m = " << format_number(spec.track_length_m) << '\n'
     << "confidence_threshold = " << format_number(spec.confidence_threshold) << '\n'
     << "hold_time_s = " << format_number(spec.hold_time_s) << '\n'
     << "queue_capacity = " << spec.queue_capacity << '\n';

  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    os << "\n[object." << i << "]\n"
       << "class = " << class_name(o.object_class) << '\n'
       << "position_m = " << format_number(o.position) << '\n'
       << "width_m = " << format_number(o.width_m) << '\n'
       << "height_m = " << format_number(o.height_m) << '\n';
  }
  for (std::size_t i = 0; i < spec.weather_schedule.size(); ++i) {
    const auto& w = spec.weather_schedule[i];
    os << "\n[weather." << i << "]\n"
       << "time_s = " << format_number(w.time_s) << '\n'
       << "condition = " << to_string(w.weather.condition) << '\n'
       << "visibility_m = " << format_number(w.weather.visibility_m) << '\n'
       << "sun_altitude_deg = " << format_number(w.weather.sun_altitude_deg) << '\n';
  }
  for (std::size_t i = 0; i < spec.setpoints.size(); ++i) {
    os << "\n[setpoint." << i << "]\n"
       << "time_s = " << format_number(spec.setpoints[i].time_s) << '\n'
       << "speed_kmh = " << format_number(spec.setpoints[i].speed_kmh) << '\n';
  }

  os << "\n[drift]\nkind = " << perception::drift_kind_name(spec.drift) << '\n';
  if (const auto* c = std::get_if<CovariateDrift>(&spec.drift)) {
    os << "confidence_scale = " << format_number(c->confidence_scale) << '\n'
       << "miss_rate_boost = " << format_number(c->miss_rate_boost) << '\n'
       << "bbox_jitter_sigma = " << format_number(c->bbox_jitter_sigma) << '\n';
  } else if (const auto* p = std::get_if<PriorShiftDrift>(&spec.drift)) {
    for (int k = 0; k < kNumObjectClasses; ++k) {
      os << "weight." << class_name(static_cast<ObjectClass>(k)) << " = "
         << format_number(p->weights[k]) << '\n';
    }
  } else if (const auto* cd = std::get_if<ConceptDrift>(&spec.drift)) {
    for (int k = 0; k < kNumObjectClasses; ++k) {
      os << "relabel." << class_name(static_cast<ObjectClass>(k)) << " = "
         << class_name(cd->relabel[k]) << '\n';
    }
  }

  os << "\n[mapping]\n";
  for (const auto& [limit, target] : spec.mapping.entries_kmh()) {
    os << limit << " = " << format_number(target) << '\n';
  }

  const auto& p = spec.perception;
  os << "\n[perception]\n"
     << "p_base_clear = " << format_number(p.p_base_clear) << '\n'
     << "p_base_fog = " << format_number(p.p_base_fog) << '\n'
     << "confidence_mean_clear = " << format_number(p.confidence_mean_clear) << '\n'
     << "confidence_mean_fog = " << format_number(p.confidence_mean_fog) << '\n'
     << "confidence_std = " << format_number(p.confidence_std) << '\n'
     << "max_range_m = " << format_number(p.max_range_m) << '\n'
     << "bbox_jitter_sigma = " << format_number(p.bbox_jitter_sigma) << '\n';
  return os.str();
}

ScenarioSpec paper_replica_spec() {
  ScenarioSpec spec;
  spec.name = "paper-replica";
  spec.seed = 7;
  spec.duration_s = 70.0;
  spec.initial_speed_kmh = 40.2;
  spec.track_length_m = 1200.0;

  // 30-sign in fog, 49.4 km/h cruise setpoint after passing it, 90-sign in
  // clear weather.
  spec.objects = {
      SceneObject{ObjectClass::SpeedLimit30, 200.0, 0.75, 0.75},
      SceneObject{ObjectClass::SpeedLimit90, 680.0, 0.75, 0.75},
  };
  spec.weather_schedule = {
      WeatherPhase{0.0, WeatherState::fog()},
      WeatherPhase{30.0, WeatherState::clear()},
  };
  spec.setpoints = {Setpoint{25.0, 49.4}};
  return spec;
}

std::vector<std::string> builtin_names() {
  return {"paper-replica", "fog-covariate", "prior-shift", "concept-drift", "obstacle-stop"};
}

std::optional<ScenarioSpec> builtin_spec(std::string_view name) {
  if (name == "paper-replica") return paper_replica_spec();

  if (name == "fog-covariate") {
    ScenarioSpec spec;
    spec.name = "fog-covariate";
    spec.seed = 11;
    spec.duration_s = 90.0;
    spec.initial_speed_kmh = 40.0;
    spec.track_length_m = 1200.0;
    spec.objects = {
        SceneObject{ObjectClass::SpeedLimit30, 150.0},
        SceneObject{ObjectClass::SpeedLimit90, 400.0},
        SceneObject{ObjectClass::SpeedLimit30, 700.0},
        SceneObject{ObjectClass::SpeedLimit90, 900.0},
    };
    spec.weather_schedule = {WeatherPhase{0.0, WeatherState{WeatherCondition::Fog, 60.0, 2.0}}};
    spec.drift = CovariateDrift{0.8, 0.3, 0.15};
    spec.perception.bbox_jitter_sigma = 0.05;
    return spec;
  }

  if (name == "prior-shift") {
    ScenarioSpec spec;
    spec.name = "prior-shift";
    spec.seed = 23;
    spec.duration_s = 200.0;
    spec.initial_speed_kmh = 40.0;
    spec.track_length_m = 1900.0;
    // Deployment prior: 30-signs four times as frequent as 90-signs. Spacing
    // exceeds the sensor range so only one sign is in view at a time.
    perception::Rng scene_rng(2024);
    spec.objects = perception::sample_scene(8, 150.0, 200.0, {4.0, 1.0, 0.0}, scene_rng);
    spec.weather_schedule = {WeatherPhase{0.0, WeatherState::clear()}};
    spec.perception.bbox_jitter_sigma = 0.05;
    return spec;
  }

  if (name == "concept-drift") {
    ScenarioSpec spec;
    spec.name = "concept-drift";
    spec.seed = 5;
    spec.duration_s = 40.0;
    spec.initial_speed_kmh = 40.0;
    spec.track_length_m = 800.0;
    spec.objects = {SceneObject{ObjectClass::SpeedLimit30, 200.0}};
    spec.weather_schedule = {WeatherPhase{0.0, WeatherState::clear()}};
    ConceptDrift drift;
    drift.relabel[class_id(ObjectClass::SpeedLimit30)] = ObjectClass::SpeedLimit90;
    spec.drift = drift;
    return spec;
  }

  if (name == "obstacle-stop") {
    ScenarioSpec spec;
    spec.name = "obstacle-stop";
    spec.seed = 3;
    spec.duration_s = 40.0;
    spec.initial_speed_kmh = 40.0;
    spec.track_length_m = 600.0;
    spec.objects = {SceneObject{ObjectClass::Obstacle, 250.0, 2.0, 1.5}};
    spec.weather_schedule = {WeatherPhase{0.0, WeatherState::clear()}};
    return spec;
  }
  return std::nullopt;
}

RunOutput run(const ScenarioSpec& spec) {
  validate(spec);

  bus::Bus bus;
  const double v0 = kmh_to_mps(spec.initial_speed_kmh);
  const VehicleState initial{0.0, v0, 0.0, 0.0};

  TraceRecorder recorder(bus);
  const bus::NodeId director = "scenario_director";
  const auto weather_pub =
      bus.register_publisher(director, bus::TopicName(bus::topics::kWeatherControl));
  const auto set_speed_pub = bus.register_publisher(director, bus::TopicName(bus::topics::kSetSpeed));

  perception::PerceptionNode perception(bus, spec.objects, initial, initial_weather(spec),
                                        spec.drift, spec.seed, spec.perception);
  controller::ControllerNode controller(
      bus, v0, {spec.mapping, spec.confidence_threshold, spec.hold_time_s}, spec.queue_capacity);
  plant::PlantNode plant(bus, initial, spec.queue_capacity);

  RunOutput out;
  SimClock clock(spec.tick_hz);
  const auto ticks = std::llround(spec.duration_s * spec.tick_hz);
  std::size_t next_weather = 0;
  std::size_t next_setpoint = 0;

  for (std::int64_t k = 0; k < ticks; ++k, clock.advance()) {
    const double now = clock.now();

    while (next_weather < spec.weather_schedule.size() &&
           spec.weather_schedule[next_weather].time_s <= now) {
      bus.publish(weather_pub, WeatherMsg{spec.weather_schedule[next_weather].weather, now}, now);
      ++next_weather;
    }
    while (next_setpoint < spec.setpoints.size() && spec.setpoints[next_setpoint].time_s <= now) {
      bus.publish(set_speed_pub, SetSpeedMsg{kmh_to_mps(spec.setpoints[next_setpoint].speed_kmh), now},
                  now);
      ++next_setpoint;
    }
    recorder.collect(out.trace);

    perception.tick(now);
    for (const auto& t : perception::visible_truths(perception.vehicle(), perception.scene(),
                                                    perception.config())) {
      out.truths.push_back({now, t.truth_id, t.object_class, t.bbox});
    }
    recorder.collect(out.trace);

    controller.tick(now);
    recorder.collect(out.trace);

    plant.tick(clock);
    recorder.collect(out.trace);
  }
  return out;
}

}  // namespace drivebridge::scenario
