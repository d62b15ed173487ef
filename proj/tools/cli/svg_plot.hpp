#pragma once

#include <string>

#include "drivebridge/trace.hpp"

namespace drivebridge::cli {

inline constexpr int kSvgWidth = 960;
inline constexpr int kSvgHeight = 480;

/// Speed (km/h) over time (s) with the commanded target as a step overlay and
/// a marker per detection event. Output depends only on the trace contents.
/// Throws std::invalid_argument if the trace holds no vehicle samples.
std::string render_speed_profile_svg(const trace::Trace& trace, const std::string& title);

}  // namespace drivebridge::cli
