#include "csslab/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace csslab {
namespace {

constexpr int kCanvasWidth = 800;
constexpr int kCanvasHeight = 500;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double ChartFrame::to_px_x(double x) const {
  return left + (x - x_min) / (x_max - x_min) * width;
}
double ChartFrame::to_px_y(double y) const {
  return top + height - (y - y_min) / (y_max - y_min) * height;
}
double ChartFrame::from_px_x(double px) const {
  return x_min + (px - left) / width * (x_max - x_min);
}
double ChartFrame::from_px_y(double py) const {
  return y_min + (top + height - py) / height * (y_max - y_min);
}

ChartFrame fit_frame(const std::vector<Series>& series) {
  ChartFrame f;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 == x0) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  y0 = std::min(y0, 0.0);
  if (y1 <= y0) y1 = y0 + 1.0;
  f.x_min = x0;
  f.x_max = x1;
  f.y_min = y0;
  f.y_max = y1 + 0.05 * (y1 - y0);
  return f;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series) {
  const ChartFrame f = fit_frame(series);
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvasWidth
     << "\" height=\"" << kCanvasHeight << "\" viewBox=\"0 0 " << kCanvasWidth
     << ' ' << kCanvasHeight << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kCanvasWidth << "\" height=\""
     << kCanvasHeight << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kCanvasWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title)
     << "</text>\n";
  os << "<g id=\"plot\" data-left=\"" << exact(f.left) << "\" data-top=\""
     << exact(f.top) << "\" data-width=\"" << exact(f.width)
     << "\" data-height=\"" << exact(f.height) << "\" data-x-min=\""
     << exact(f.x_min) << "\" data-x-max=\"" << exact(f.x_max)
     << "\" data-y-min=\"" << exact(f.y_min) << "\" data-y-max=\""
     << exact(f.y_max) << "\">\n";

  // Axes and ticks.
  os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top + f.height)
     << "\" x2=\"" << num(f.left + f.width) << "\" y2=\""
     << num(f.top + f.height) << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\""
     << num(f.left) << "\" y2=\"" << num(f.top + f.height)
     << "\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = f.x_min + (f.x_max - f.x_min) * i / kTicks;
    const double yv = f.y_min + (f.y_max - f.y_min) * i / kTicks;
    char xl[32], yl[32];
    std::snprintf(xl, sizeof xl, "%.3g", xv);
    std::snprintf(yl, sizeof yl, "%.3g", yv);
    os << "<text x=\"" << num(f.to_px_x(xv)) << "\" y=\""
       << num(f.top + f.height + 16) << "\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"11\">" << xl << "</text>\n"
       << "<text x=\"" << num(f.left - 6) << "\" y=\""
       << num(f.to_px_y(yv) + 4) << "\" text-anchor=\"end\" "
       << "font-family=\"sans-serif\" font-size=\"11\">" << yl << "</text>\n";
  }
  os << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\""
     << num(f.top + f.height + 36) << "\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"12\">" << escape(x_label)
     << "</text>\n"
     << "<text x=\"16\" y=\"" << num(f.top + f.height / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
     << "transform=\"rotate(-90 16 " << num(f.top + f.height / 2) << ")\">"
     << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<polyline data-series=\"" << escape(s.name)
       << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      if (j) os << ' ';
      os << num(f.to_px_x(s.points[j].first)) << ','
         << num(f.to_px_y(s.points[j].second));
    }
    os << "\"/>\n";
  }
  os << "</g>\n";

  // Legend.
  os << "<g id=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = f.top + 10 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"650\" y1=\"" << num(y) << "\" x2=\"670\" y2=\"" << num(y)
       << "\" stroke=\"" << kPalette[i % std::size(kPalette)]
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"676\" y=\"" << num(y + 4)
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape(series[i].name) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace csslab
