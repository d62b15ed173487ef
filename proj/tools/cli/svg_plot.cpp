#include "cli/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "drivebridge/units.hpp"

namespace drivebridge::cli {

namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* class_color(ObjectClass c) {
  switch (c) {
    case ObjectClass::SpeedLimit30:
      return "#d62728";
    case ObjectClass::SpeedLimit90:
      return "#2ca02c";
    case ObjectClass::Obstacle:
      return "#9467bd";
  }
  return "#000000";
}

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_speed_profile_svg(const trace::Trace& tr, const std::string& title) {
  struct Point {
    double t;
    double v;
  };
  std::vector<Point> speed;
  std::vector<Point> target;
  std::vector<std::pair<double, ObjectClass>> detections;
  for (const auto& rec : tr) {
    if (const auto* s = std::get_if<trace::VehicleSample>(&rec.payload)) {
      speed.push_back({rec.time, mps_to_kmh(s->speed)});
    } else if (const auto* c = std::get_if<trace::CommandEvent>(&rec.payload)) {
      const double v = mps_to_kmh(c->target_speed);
      if (target.empty() || target.back().v != v) target.push_back({rec.time, v});
    } else if (const auto* d = std::get_if<trace::DetectionEvent>(&rec.payload)) {
      detections.emplace_back(rec.time, d->object_class);
    }
  }
  if (speed.empty()) throw std::invalid_argument("trace has no vehicle samples to plot");

  double t0 = speed.front().t;
  double t1 = speed.back().t;
  for (const auto& p : target) t0 = std::min(t0, p.t);
  if (t1 - t0 <= 0.0) {
    t0 -= 0.5;
    t1 += 0.5;
  }
  double vmax = 10.0;
  for (const auto& p : speed) vmax = std::max(vmax, p.v);
  for (const auto& p : target) vmax = std::max(vmax, p.v);
  const double ystep = nice_step(vmax, 6);
  vmax = std::ceil(vmax * 1.05 / ystep) * ystep;

  const double pw = kSvgWidth - kLeft - kRight;
  const double ph = kSvgHeight - kTop - kBottom;
  auto x = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * pw; };
  auto y = [&](double v) { return kTop + ph - v / vmax * ph; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kSvgWidth << ' '
     << kSvgHeight << "\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
     << "\" fill=\"#ffffff\"/>\n";
  os << "<text x=\"" << kSvgWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">"
     << escape(title) << "</text>\n";

  // Grid and axes.
  os << "<g stroke=\"#dddddd\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v = 0.0; v <= vmax + 1e-9; v += ystep) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y(v) << "\" x2=\"" << kLeft + pw << "\" y2=\""
       << y(v) << "\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << y(v) + 4
       << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333333\">" << std::setprecision(0) << v
       << std::setprecision(2) << "</text>\n";
  }
  const double xstep = nice_step(t1 - t0, 10);
  for (double t = std::ceil(t0 / xstep) * xstep; t <= t1 + 1e-9; t += xstep) {
    os << "<line x1=\"" << x(t) << "\" y1=\"" << kTop << "\" x2=\"" << x(t) << "\" y2=\""
       << kTop + ph << "\"/>\n";
    os << "<text x=\"" << x(t) << "\" y=\"" << kTop + ph + 16
       << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333333\">" << std::setprecision(1)
       << t << std::setprecision(2) << "</text>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kSvgHeight - 24
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">time [s]</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " << kTop + ph / 2
     << ")\">speed [km/h]</text>\n";

  // Detection markers along the top edge of the plot.
  os << "<g id=\"detections\" stroke-width=\"1\">\n";
  for (const auto& [t, cls] : detections) {
    os << "<line x1=\"" << x(t) << "\" y1=\"" << kTop << "\" x2=\"" << x(t) << "\" y2=\""
       << kTop + 8 << "\" stroke=\"" << class_color(cls) << "\"/>\n";
  }
  os << "</g>\n";

  if (!target.empty()) {
    os << "<path id=\"target\" data-kmh=\"";
    for (std::size_t i = 0; i < target.size(); ++i) os << (i ? " " : "") << target[i].v;
    os << "\" fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"1.5\" "
          "stroke-dasharray=\"6 4\" d=\"M"
       << x(target.front().t) << ' ' << y(target.front().v);
    for (std::size_t i = 1; i < target.size(); ++i) {
      os << " H" << x(target[i].t) << " V" << y(target[i].v);
    }
    os << " H" << x(t1) << "\"/>\n";
  }

  if (speed.size() == 1) {
    os << "<circle id=\"speed\" cx=\"" << x(speed.front().t) << "\" cy=\"" << y(speed.front().v)
       << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  } else {
    os << "<polyline id=\"speed\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < speed.size(); ++i) {
      if (i) os << ' ';
      os << x(speed[i].t) << ',' << y(speed[i].v);
    }
    os << "\"/>\n";
  }

  // Legend.
  const double lx = kLeft + pw - 190;
  const double ly = kTop + ph - 62;
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"180\" height=\"54\" fill=\"#ffffff\" "
     << "stroke=\"#999999\"/>\n"
     << "<line x1=\"" << lx + 8 << "\" y1=\"" << ly + 14 << "\" x2=\"" << lx + 32 << "\" y2=\""
     << ly + 14 << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n"
     << "<text x=\"" << lx + 40 << "\" y=\"" << ly + 18 << "\">vehicle speed</text>\n"
     << "<line x1=\"" << lx + 8 << "\" y1=\"" << ly + 30 << "\" x2=\"" << lx + 32 << "\" y2=\""
     << ly + 30 << "\" stroke=\"#ff7f0e\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n"
     << "<text x=\"" << lx + 40 << "\" y=\"" << ly + 34 << "\">commanded target</text>\n"
     << "<line x1=\"" << lx + 20 << "\" y1=\"" << ly + 40 << "\" x2=\"" << lx + 20 << "\" y2=\""
     << ly + 48 << "\" stroke=\"#d62728\"/>\n"
     << "<text x=\"" << lx + 40 << "\" y=\"" << ly + 48 << "\">detection event</text>\n"
     << "</g>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace drivebridge::cli
