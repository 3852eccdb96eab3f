#pragma once

#include <string>
#include <vector>

namespace advreal::harness {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Standalone SVG line chart with axes, ticks and a legend.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

/// Polar chart; x holds angles in degrees, y radii in [0, r_max].
std::string polar_plot_svg(const std::string& title, const std::vector<Series>& series, double r_max = 1.0);

}  // namespace advreal::harness
