#pragma once

#include <string>
#include <vector>

namespace mgap {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
};

// Minimal static chart: axes, min/max tick labels, one polyline (or dot
// cloud) per series, legend from labels.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool scatter = false);

}  // namespace mgap
