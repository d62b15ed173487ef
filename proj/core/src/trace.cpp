#include "drivebridge/trace.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace drivebridge::trace {

namespace {

using nlohmann::json;

constexpr std::size_t kNumFields = 8;
using Fields = std::array<std::string, kNumFields>;

struct KindName {
  std::string_view operator()(const VehicleSample&) const { return "VehicleSample"; }
  std::string_view operator()(const DetectionEvent&) const { return "DetectionEvent"; }
  std::string_view operator()(const CommandEvent&) const { return "CommandEvent"; }
  std::string_view operator()(const WeatherEvent&) const { return "WeatherEvent"; }
  std::string_view operator()(const SetpointEvent&) const { return "SetpointEvent"; }
};

std::string format_uint(std::uint64_t v) { return std::to_string(v); }

struct ToFields {
  Fields operator()(const VehicleSample& s) const {
    return {format_number(s.position), format_number(s.speed), format_number(s.acceleration)};
  }
  Fields operator()(const DetectionEvent& d) const {
    return {std::to_string(class_id(d.object_class)),
            format_number(d.confidence),
            format_number(d.bbox.cx),
            format_number(d.bbox.cy),
            format_number(d.bbox.w),
            format_number(d.bbox.h),
            d.truth_id ? format_uint(*d.truth_id) : std::string{},
            format_uint(d.seq)};
  }
  Fields operator()(const CommandEvent& c) const {
    return {format_number(c.target_speed), format_number(c.accel), format_number(c.steering),
            {}, {}, {}, {}, format_uint(c.seq)};
  }
  Fields operator()(const WeatherEvent& w) const {
    return {std::to_string(static_cast<int>(w.weather.condition)),
            format_number(w.weather.visibility_m),
            format_number(w.weather.sun_altitude_deg),
            {}, {}, {}, {}, format_uint(w.seq)};
  }
  Fields operator()(const SetpointEvent& s) const {
    return {format_number(s.speed), {}, {}, {}, {}, {}, {}, format_uint(s.seq)};
  }
};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t line, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(line, std::string("bad number in ") + field + ": '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line, const char* field) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(line, std::string("bad integer in ") + field + ": '" + std::string(s) + "'");
  }
  return v;
}

ObjectClass parse_class(std::uint64_t id, std::size_t line) {
  if (id >= static_cast<std::uint64_t>(kNumObjectClasses)) {
    throw FormatError(line, "unknown class id " + std::to_string(id));
  }
  return static_cast<ObjectClass>(id);
}

WeatherCondition parse_condition(std::uint64_t id, std::size_t line) {
  if (id > 1) throw FormatError(line, "unknown weather condition " + std::to_string(id));
  return static_cast<WeatherCondition>(id);
}

TraceRecord parse_csv_row(std::string_view row, std::size_t line) {
  const auto cols = split(row, ',');
  if (cols.size() != 2 + kNumFields) {
    throw FormatError(line, "expected " + std::to_string(2 + kNumFields) + " columns, got " +
                                std::to_string(cols.size()));
  }
  auto field = [&](std::size_t i) { return cols[2 + i]; };
  auto num = [&](std::size_t i) { return parse_double(field(i), line, "field"); };
  auto uint = [&](std::size_t i) { return parse_uint(field(i), line, "field"); };

  TraceRecord rec;
  rec.time = parse_double(cols[0], line, "time");
  const std::string_view kind = cols[1];
  if (kind == "VehicleSample") {
    rec.payload = VehicleSample{num(0), num(1), num(2)};
  } else if (kind == "DetectionEvent") {
    DetectionEvent d;
    d.object_class = parse_class(uint(0), line);
    d.confidence = num(1);
    d.bbox = BBox{num(2), num(3), num(4), num(5)};
    if (!field(6).empty()) d.truth_id = static_cast<std::uint32_t>(uint(6));
    d.seq = uint(7);
    rec.payload = d;
  } else if (kind == "CommandEvent") {
    rec.payload = CommandEvent{num(0), num(1), num(2), uint(7)};
  } else if (kind == "WeatherEvent") {
    rec.payload = WeatherEvent{WeatherState{parse_condition(uint(0), line), num(1), num(2)}, uint(7)};
  } else if (kind == "SetpointEvent") {
    rec.payload = SetpointEvent{num(0), uint(7)};
  } else {
    throw FormatError(line, "unknown record kind '" + std::string(kind) + "'");
  }
  return rec;
}

struct ToJson {
  json& j;
  void operator()(const VehicleSample& s) const {
    j["position"] = s.position;
    j["speed"] = s.speed;
    j["acceleration"] = s.acceleration;
  }
  void operator()(const DetectionEvent& d) const {
    j["class_id"] = class_id(d.object_class);
    j["class_name"] = class_name(d.object_class);
    j["confidence"] = d.confidence;
    j["bbox"] = {d.bbox.cx, d.bbox.cy, d.bbox.w, d.bbox.h};
    j["truth_id"] = d.truth_id ? json(*d.truth_id) : json(nullptr);
    j["seq"] = d.seq;
  }
  void operator()(const CommandEvent& c) const {
    j["target_speed"] = c.target_speed;
    j["accel"] = c.accel;
    j["steering"] = c.steering;
    j["seq"] = c.seq;
  }
  void operator()(const WeatherEvent& w) const {
    j["condition"] = to_string(w.weather.condition);
    j["visibility_m"] = w.weather.visibility_m;
    j["sun_altitude_deg"] = w.weather.sun_altitude_deg;
    j["seq"] = w.seq;
  }
  void operator()(const SetpointEvent& s) const {
    j["speed"] = s.speed;
    j["seq"] = s.seq;
  }
};

TraceRecord parse_json_row(const json& j) {
  TraceRecord rec;
  rec.time = j.at("time").get<double>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "VehicleSample") {
    rec.payload = VehicleSample{j.at("position").get<double>(), j.at("speed").get<double>(),
                                j.at("acceleration").get<double>()};
  } else if (kind == "DetectionEvent") {
    DetectionEvent d;
    auto cls = object_class_from_id(j.at("class_id").get<int>());
    if (!cls) throw std::invalid_argument("unknown class id");
    d.object_class = *cls;
    d.confidence = j.at("confidence").get<double>();
    const auto& b = j.at("bbox");
    d.bbox = BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                  b.at(3).get<double>()};
    if (!j.at("truth_id").is_null()) d.truth_id = j.at("truth_id").get<std::uint32_t>();
    d.seq = j.at("seq").get<std::uint64_t>();
    rec.payload = d;
  } else if (kind == "CommandEvent") {
    rec.payload = CommandEvent{j.at("target_speed").get<double>(), j.at("accel").get<double>(),
                               j.at("steering").get<double>(), j.at("seq").get<std::uint64_t>()};
  } else if (kind == "WeatherEvent") {
    auto cond = weather_condition_from_name(j.at("condition").get<std::string>());
    if (!cond) throw std::invalid_argument("unknown weather condition");
    rec.payload = WeatherEvent{WeatherState{*cond, j.at("visibility_m").get<double>(),
                                            j.at("sun_altitude_deg").get<double>()},
                               j.at("seq").get<std::uint64_t>()};
  } else if (kind == "SetpointEvent") {
    rec.payload = SetpointEvent{j.at("speed").get<double>(), j.at("seq").get<std::uint64_t>()};
  } else {
    throw std::invalid_argument("unknown record kind '" + kind + "'");
  }
  return rec;
}

}  // namespace

std::string_view TraceRecord::kind() const { return std::visit(KindName{}, payload); }

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& out, const Trace& trace) {
  out << kCsvHeader << '\n';
  for (const auto& rec : trace) {
    out << format_number(rec.time) << ',' << rec.kind();
    for (const auto& f : std::visit(ToFields{}, rec.payload)) out << ',' << f;
    out << '\n';
  }
}

void write_jsonl(std::ostream& out, const Trace& trace) {
  for (const auto& rec : trace) {
    json j;
    j["time"] = rec.time;
    j["kind"] = rec.kind();
    std::visit(ToJson{j}, rec.payload);
    out << j.dump() << '\n';
  }
}

std::string to_csv(const Trace& trace) {
  std::ostringstream os;
  write_csv(os, trace);
  return os.str();
}

std::string to_jsonl(const Trace& trace) {
  std::ostringstream os;
  write_jsonl(os, trace);
  return os.str();
}

Trace read_csv(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim_cr(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != kCsvHeader) throw FormatError(lineno, "missing or unexpected trace header");
      header_seen = true;
      continue;
    }
    trace.push_back(parse_csv_row(row, lineno));
  }
  if (!header_seen) throw FormatError(lineno, "empty trace file");
  return trace;
}

Trace read_jsonl(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim_cr(line);
    if (row.empty()) continue;
    try {
      trace.push_back(parse_json_row(json::parse(row)));
    } catch (const std::exception& e) {
      throw FormatError(lineno, e.what());
    }
  }
  return trace;
}

Trace read_any(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::istringstream is(text);
  if (first != std::string::npos && text[first] == '{') return read_jsonl(is);
  return read_csv(is);
}

void write_truths_csv(std::ostream& out, const std::vector<TruthRow>& truths) {
  out << kTruthCsvHeader << '\n';
  for (const auto& t : truths) {
    out << format_number(t.time) << ',' << t.truth_id << ',' << class_id(t.object_class) << ','
        << format_number(t.bbox.cx) << ',' << format_number(t.bbox.cy) << ','
        << format_number(t.bbox.w) << ',' << format_number(t.bbox.h) << '\n';
  }
}

std::vector<TruthRow> read_truths_csv(std::istream& in) {
  std::vector<TruthRow> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim_cr(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != kTruthCsvHeader) throw FormatError(lineno, "missing or unexpected truths header");
      header_seen = true;
      continue;
    }
    const auto cols = split(row, ',');
    if (cols.size() != 7) throw FormatError(lineno, "expected 7 columns");
    TruthRow t;
    t.time = parse_double(cols[0], lineno, "time");
    t.truth_id = static_cast<std::uint32_t>(parse_uint(cols[1], lineno, "truth_id"));
    t.object_class = parse_class(parse_uint(cols[2], lineno, "class_id"), lineno);
    t.bbox = BBox{parse_double(cols[3], lineno, "cx"), parse_double(cols[4], lineno, "cy"),
                  parse_double(cols[5], lineno, "w"), parse_double(cols[6], lineno, "h")};
    out.push_back(t);
  }
  if (!header_seen) throw FormatError(lineno, "empty truths file");
  return out;
}

std::vector<std::pair<double, VehicleSample>> vehicle_samples(const Trace& trace) {
  std::vector<std::pair<double, VehicleSample>> out;
  for (const auto& rec : trace) {
    if (const auto* s = std::get_if<VehicleSample>(&rec.payload)) out.emplace_back(rec.time, *s);
  }
  return out;
}

}  // namespace drivebridge::trace
