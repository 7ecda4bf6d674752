#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ergokit {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool points_only = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<std::pair<double, std::string>> h_lines;  // value, color
  std::vector<std::pair<double, std::string>> v_lines;
  int width = 720;
  int height = 480;
};

/// Deterministic static SVG: no timestamps, fixed float formatting.
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace ergokit
