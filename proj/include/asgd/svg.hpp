#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace asgd {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;  // used for reference/projection lines
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Self-contained SVG line chart; no plotting dependency. Non-positive
/// values are dropped on log axes.
void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec,
                     std::span<const PlotSeries> series);

}  // namespace asgd
