#pragma once

#include <string>
#include <utility>
#include <vector>

namespace paretotab::cli {

struct ChartSeries {
  std::string name;
  // Non-finite y values break the line.
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<ChartSeries> series;
};

// Standalone SVG document. `comment` is placed in an XML comment after the
// declaration.
std::string render_svg(const LineChart& chart, const std::string& comment);

std::string xml_escape(const std::string& s);

}  // namespace paretotab::cli
