#pragma once

#include <cstdint>
#include <stdexcept>

namespace drivebridge {

/// Logical fixed-rate clock. Times are computed as tick / rate so that long
/// runs do not accumulate rounding error from repeated additions.
class SimClock {
 public:
  explicit SimClock(double tick_hz) : tick_hz_(tick_hz) {
    if (!(tick_hz > 0.0)) throw std::invalid_argument("tick rate must be > 0");
  }

  double now() const { return time_at(tick_); }
  double next() const { return time_at(tick_ + 1); }
  double dt() const { return 1.0 / tick_hz_; }
  double tick_hz() const { return tick_hz_; }
  std::int64_t tick() const { return tick_; }
  double time_at(std::int64_t tick) const { return static_cast<double>(tick) / tick_hz_; }

  void advance() { ++tick_; }

 private:
  double tick_hz_;
  std::int64_t tick_ = 0;
};

}  // namespace drivebridge
