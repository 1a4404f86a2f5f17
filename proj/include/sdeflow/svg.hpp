#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdeflow {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Self-contained line plot with axes, series labels and a seed annotation;
// byte-deterministic for fixed inputs.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          std::uint64_t seed, bool log_x = false, bool log_y = false);

// Heat map with a legend, for criterion-matrix style data; values in [0, 1].
std::string svg_heatmap(const std::vector<double>& row_values,
                        const std::vector<double>& col_values,
                        const std::vector<std::vector<double>>& cells, const std::string& title,
                        const std::string& row_label, const std::string& col_label,
                        std::uint64_t seed);

} // namespace sdeflow
