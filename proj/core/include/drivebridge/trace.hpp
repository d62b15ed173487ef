#pragma once

// Scenario trace records and their on-disk formats.
//
// CSV layout (header is fixed):
//
//   time,kind,field1,field2,field3,field4,field5,field6,field7,field8
//
//   kind            field1       field2      field3        field4..6   field7    field8
//   VehicleSample   position_m   speed_mps   accel_mps2
//   DetectionEvent  class_id     confidence  cx            cy,w,h      truth_id  seq
//   CommandEvent    target_mps   accel_mps2  steering_rad                        seq
//   WeatherEvent    condition    visibility  sun_alt_deg                         seq
//   SetpointEvent   speed_mps                                                    seq
//
// Unused fields are empty. Numbers use the shortest representation that
// round-trips exactly, so a trace read back compares equal to the original.
// The JSON-lines variant carries the same data with named keys.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drivebridge/messages.hpp"

namespace drivebridge::trace {

struct VehicleSample {
  double position = 0.0;
  double speed = 0.0;
  double acceleration = 0.0;

  bool operator==(const VehicleSample&) const = default;
};

struct DetectionEvent {
  ObjectClass object_class = ObjectClass::SpeedLimit30;
  double confidence = 0.0;
  BBox bbox;
  std::optional<std::uint32_t> truth_id;
  std::uint64_t seq = 0;

  bool operator==(const DetectionEvent&) const = default;
};

struct CommandEvent {
  double target_speed = 0.0;
  double accel = 0.0;
  double steering = 0.0;
  std::uint64_t seq = 0;

  bool operator==(const CommandEvent&) const = default;
};

struct WeatherEvent {
  WeatherState weather;
  std::uint64_t seq = 0;

  bool operator==(const WeatherEvent&) const = default;
};

struct SetpointEvent {
  double speed = 0.0;
  std::uint64_t seq = 0;

  bool operator==(const SetpointEvent&) const = default;
};

using RecordPayload =
    std::variant<VehicleSample, DetectionEvent, CommandEvent, WeatherEvent, SetpointEvent>;

struct TraceRecord {
  double time = 0.0;
  RecordPayload payload;

  std::string_view kind() const;

  bool operator==(const TraceRecord&) const = default;
};

using Trace = std::vector<TraceRecord>;

/// Ground-truth box of an object in view at frame `time`.
struct TruthRow {
  double time = 0.0;
  std::uint32_t truth_id = 0;
  ObjectClass object_class = ObjectClass::SpeedLimit30;
  BBox bbox;

  bool operator==(const TruthRow&) const = default;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr std::string_view kCsvHeader =
    "time,kind,field1,field2,field3,field4,field5,field6,field7,field8";
inline constexpr std::string_view kTruthCsvHeader = "time,truth_id,class_id,cx,cy,w,h";

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

void write_csv(std::ostream& out, const Trace& trace);
void write_jsonl(std::ostream& out, const Trace& trace);
std::string to_csv(const Trace& trace);
std::string to_jsonl(const Trace& trace);

/// Throws FormatError naming the offending line.
Trace read_csv(std::istream& in);
Trace read_jsonl(std::istream& in);

/// Picks the reader from the first non-empty line: CSV if it is the header,
/// JSON lines if it starts with '{'.
Trace read_any(std::istream& in);

void write_truths_csv(std::ostream& out, const std::vector<TruthRow>& truths);
std::vector<TruthRow> read_truths_csv(std::istream& in);

/// Convenience filters.
std::vector<std::pair<double, VehicleSample>> vehicle_samples(const Trace& trace);

}  // namespace drivebridge::trace
