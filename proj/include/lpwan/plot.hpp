#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lpwan {

// Minimal SVG charts. Values are drawn as given; nothing is computed here.

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

struct BarGroup {
  std::string label;
  std::vector<double> values; ///< one per series name
};

std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::string>& series_names, const std::vector<BarGroup>& groups);

} // namespace lpwan
