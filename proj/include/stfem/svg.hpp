#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stfem {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  std::vector<PlotSeries> series;
  std::vector<std::string> notes;  ///< extra lines printed under the title
};

/// Standalone SVG 1.1 line plot with axes, decade ticks and a legend.
/// Non-positive values are skipped on logarithmic axes.
void write_svg(std::ostream& out, const LinePlot& plot);

}  // namespace stfem
