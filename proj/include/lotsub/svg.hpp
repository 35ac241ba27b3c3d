#pragma once

#include <string>
#include <vector>

namespace lotsub {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart: axes with ticks, one polyline plus markers
/// per series, and a legend. The y range is fixed to [y_min, y_max].
std::string line_chart_svg(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                           const std::string& y_label, double y_min = 0.0, double y_max = 1.0);

}  // namespace lotsub
