#ifndef CSSLAB_SVG_H_
#define CSSLAB_SVG_H_

#include <string>
#include <utility>
#include <vector>

namespace csslab {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Fixed 800x500 canvas, linear axes. The plot frame and data ranges are
// written as data-* attributes on <g id="plot"> so coordinates can be mapped
// back to values.
struct ChartFrame {
  double left = 70.0;
  double top = 40.0;
  double width = 560.0;
  double height = 390.0;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double to_px_x(double x) const;
  double to_px_y(double y) const;
  double from_px_x(double px) const;
  double from_px_y(double py) const;
};

ChartFrame fit_frame(const std::vector<Series>& series);

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series);

}  // namespace csslab

#endif  // CSSLAB_SVG_H_
