// Small self-contained SVG charts (800x500 viewBox, embedded value labels).
#pragma once

#include <string>
#include <vector>

namespace emint {

struct BarSeries {
    std::string name;
    std::vector<double> values;
};

// Grouped bar chart; series share the category labels.
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<BarSeries>& series);

struct LineSeries {
    std::string name;
    std::vector<double> values; // x = index
};

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::vector<LineSeries>& series);

} // namespace emint
