#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kglab::cli {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotOptions {
  std::string x_label = "x";
  std::string y_label = "y";
  bool log_x = false;
  bool log_y = false;
  std::optional<double> reference_y;  // horizontal dashed line
};

// 800x600 line plot; one <path> element per series.
std::string render_svg(const std::vector<Series>& series, const PlotOptions& options);

}  // namespace kglab::cli
