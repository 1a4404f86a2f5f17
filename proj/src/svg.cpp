#include "sdeflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdeflow/io.hpp"

namespace sdeflow {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt_coord(double v) {
    // fixed two decimals keeps files small and byte-stable
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          std::uint64_t seed, bool log_x, bool log_y) {
    if (series.empty()) throw std::invalid_argument("svg_line_plot: empty report");
    for (const auto& s : series)
        if (s.x.empty() || s.x.size() != s.y.size())
            throw std::invalid_argument("svg_line_plot: empty or ragged series");

    auto tx = [log_x](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [log_y](double v) { return log_y ? std::log10(v) : v; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    auto px = [&](double v) {
        return kMarginL + (tx(v) - xmin) / (xmax - xmin) * (kWidth - kMarginL - kMarginR);
    };
    auto py = [&](double v) {
        return kHeight - kMarginB -
               (ty(v) - ymin) / (ymax - ymin) * (kHeight - kMarginT - kMarginB);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(kWidth / 2) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
    // axes
    svg += "<line x1=\"" + std::to_string(kMarginL) + "\" y1=\"" +
           std::to_string(kHeight - kMarginB) + "\" x2=\"" + std::to_string(kWidth - kMarginR) +
           "\" y2=\"" + std::to_string(kHeight - kMarginB) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + std::to_string(kMarginL) + "\" y1=\"" + std::to_string(kMarginT) +
           "\" x2=\"" + std::to_string(kMarginL) + "\" y2=\"" +
           std::to_string(kHeight - kMarginB) + "\" stroke=\"black\"/>\n";
    // axis range labels
    svg += "<text x=\"" + std::to_string(kMarginL) + "\" y=\"" + std::to_string(kHeight - 30) +
           "\" font-size=\"11\">" + format_double(log_x ? std::pow(10, xmin) : xmin) +
           "</text>\n";
    svg += "<text x=\"" + std::to_string(kWidth - kMarginR) + "\" y=\"" +
           std::to_string(kHeight - 30) + "\" text-anchor=\"end\" font-size=\"11\">" +
           format_double(log_x ? std::pow(10, xmax) : xmax) + "</text>\n";
    svg += "<text x=\"8\" y=\"" + std::to_string(kHeight - kMarginB) + "\" font-size=\"11\">" +
           format_double(log_y ? std::pow(10, ymin) : ymin) + "</text>\n";
    svg += "<text x=\"8\" y=\"" + std::to_string(kMarginT + 10) + "\" font-size=\"11\">" +
           format_double(log_y ? std::pow(10, ymax) : ymax) + "</text>\n";
    svg += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"" + std::to_string(kHeight - 10) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + x_label + "</text>\n";
    svg += "<text x=\"14\" y=\"" + std::to_string(kHeight / 2) +
           "\" font-size=\"12\" transform=\"rotate(-90 14 " + std::to_string(kHeight / 2) +
           ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) pts += " ";
            pts += fmt_coord(px(s.x[i])) + "," + fmt_coord(py(s.y[i]));
        }
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        svg += "<text x=\"" + std::to_string(kWidth - kMarginR - 150) + "\" y=\"" +
               std::to_string(kMarginT + 14 * (si + 1)) + "\" font-size=\"11\" fill=\"" + color +
               "\">" + s.label + "</text>\n";
    }
    svg += "<text x=\"" + std::to_string(kWidth - kMarginR) + "\" y=\"14\" text-anchor=\"end\" " +
           "font-size=\"10\" fill=\"#555\">seed " + std::to_string(seed) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string svg_heatmap(const std::vector<double>& row_values,
                        const std::vector<double>& col_values,
                        const std::vector<std::vector<double>>& cells, const std::string& title,
                        const std::string& row_label, const std::string& col_label,
                        std::uint64_t seed) {
    if (cells.empty() || cells.front().empty())
        throw std::invalid_argument("svg_heatmap: empty report");
    const int nr = static_cast<int>(row_values.size());
    const int nc = static_cast<int>(col_values.size());
    const int cw = (kWidth - kMarginL - kMarginR - 60) / std::max(1, nc);
    const int ch = (kHeight - kMarginT - kMarginB) / std::max(1, nr);

    auto color_of = [](double v) {
        // white -> blue ramp
        const int b = 255;
        const int rg = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(v, 0.0, 1.0))));
        char buf[16];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rg, rg, b);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(kWidth / 2) +
           "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) {
            const int x = kMarginL + j * cw;
            const int y = kMarginT + i * ch;
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
                   "\" width=\"" + std::to_string(cw) + "\" height=\"" + std::to_string(ch) +
                   "\" fill=\"" + color_of(cells[i][j]) + "\" stroke=\"#999\"/>\n";
            svg += "<text x=\"" + std::to_string(x + cw / 2) + "\" y=\"" +
                   std::to_string(y + ch / 2 + 4) +
                   "\" text-anchor=\"middle\" font-size=\"10\">" + fmt_coord(cells[i][j]) +
                   "</text>\n";
        }
    for (int i = 0; i < nr; ++i)
        svg += "<text x=\"" + std::to_string(kMarginL - 6) + "\" y=\"" +
               std::to_string(kMarginT + i * ch + ch / 2 + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + format_double(row_values[i]) +
               "</text>\n";
    for (int j = 0; j < nc; ++j)
        svg += "<text x=\"" + std::to_string(kMarginL + j * cw + cw / 2) + "\" y=\"" +
               std::to_string(kMarginT + nr * ch + 16) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + format_double(col_values[j]) +
               "</text>\n";
    svg += "<text x=\"" + std::to_string(kMarginL / 2) + "\" y=\"" +
           std::to_string(kMarginT - 8) + "\" font-size=\"12\">" + row_label + " \\ " + col_label +
           "</text>\n";
    // legend
    const int lx = kWidth - 50;
    for (int k = 0; k <= 10; ++k) {
        const double v = k / 10.0;
        svg += "<rect x=\"" + std::to_string(lx) + "\" y=\"" +
               std::to_string(kHeight - kMarginB - (k + 1) * 18) +
               "\" width=\"16\" height=\"18\" fill=\"" + color_of(v) + "\"/>\n";
        svg += "<text x=\"" + std::to_string(lx + 20) + "\" y=\"" +
               std::to_string(kHeight - kMarginB - k * 18 - 4) + "\" font-size=\"9\">" +
               fmt_coord(v) + "</text>\n";
    }
    svg += "<text x=\"" + std::to_string(kWidth - kMarginR) + "\" y=\"14\" text-anchor=\"end\" " +
           "font-size=\"10\" fill=\"#555\">seed " + std::to_string(seed) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

} // namespace sdeflow
