#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stylemill {

// Minimal SVG emitters for sweep/comparison reports. One mark per data
// point; every numeric label is rendered with the exact same shortest
// round-trip formatting the JSON reports use.

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points; // (x, y)
};

struct ChartBarGroup {
    std::string label;
    std::vector<std::pair<std::string, double>> bars; // (series, value)
};

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series);

std::string render_bar_chart(const std::string& title, const std::string& y_label,
                             const std::vector<ChartBarGroup>& groups);

// Same formatting as nlohmann's double serialization (shortest round trip).
std::string fmt_double(double v);

} // namespace stylemill
