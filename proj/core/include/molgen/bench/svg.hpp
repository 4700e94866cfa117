#pragma once

#include <string>
#include <vector>

namespace molgen::bench {

/// One plotted data set. x and y must be the same length; line connects the
/// points in order, otherwise each point is drawn as a marker.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;
};

/// Self-contained SVG line/scatter plot. Output is deterministic: fixed
/// palette, fixed layout, fmt_double coordinates. Degenerate axis ranges are
/// padded so every finite input renders. Plots are companion artifacts; the
/// CSVs hold the normative numbers.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series, int width = 640,
                    int height = 420);

}  // namespace molgen::bench
