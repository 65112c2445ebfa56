#include "emint/svg_report.hpp"

#include <algorithm>
#include <cmath>

#include "emint/errors.hpp"
#include "emint/num.hpp"

namespace emint {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

const char* kPalette[] = {"#4878CF", "#EE854A", "#6ACC64", "#D65F5F", "#956CB4"};

std::string num(double v) {
    std::string s = format_fixed(v, 2);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s.empty() ? "0" : s;
}

std::string header(const std::string& title) {
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
           "font-family=\"Helvetica, Arial, sans-serif\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"#ffffff\"/>\n";
    svg += "  <text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" fill=\"#222\">" +
           title + "</text>\n";
    return svg;
}

void axes(std::string& svg, double max_value) {
    const double x0 = kLeft;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    svg += "  <line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(kWidth - kRight) +
           "\" y2=\"" + num(y0) + "\" stroke=\"#333\"/>\n";
    svg += "  <line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" +
           num(y1) + "\" stroke=\"#333\"/>\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double v = max_value * i / ticks;
        const double y = y0 - (y0 - y1) * i / ticks;
        svg += "  <line x1=\"" + num(x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0) +
               "\" y2=\"" + num(y) + "\" stroke=\"#333\"/>\n";
        svg += "  <line x1=\"" + num(x0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kWidth - kRight) +
               "\" y2=\"" + num(y) + "\" stroke=\"#e5e5e5\"/>\n";
        svg += "  <text x=\"" + num(x0 - 8) + "\" y=\"" + num(y + 4) +
               "\" text-anchor=\"end\" font-size=\"11\" fill=\"#444\">" + num(v) + "</text>\n";
    }
}

} // namespace

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<BarSeries>& series) {
    if (series.empty()) throw ValidationError("svg_bar_chart: no series");
    for (const auto& s : series)
        if (s.values.size() != categories.size())
            throw ValidationError("svg_bar_chart: series '" + s.name + "' length mismatch");

    double max_value = 0.0;
    for (const auto& s : series)
        for (const double v : s.values) max_value = std::max(max_value, v);
    if (max_value <= 0.0) max_value = 1.0;

    std::string svg = header(title);
    axes(svg, max_value);

    const double x0 = kLeft;
    const double y0 = kHeight - kBottom;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = y0 - kTop;
    const std::size_t n = categories.size();
    const std::size_t m = series.size();
    const double slot = plot_w / static_cast<double>(n);
    const double bar_w = slot * 0.8 / static_cast<double>(m);

    for (std::size_t si = 0; si < m; ++si) {
        const char* color = kPalette[si % 5];
        for (std::size_t i = 0; i < n; ++i) {
            const double v = series[si].values[i];
            const double h = plot_h * v / max_value;
            const double x = x0 + slot * static_cast<double>(i) + slot * 0.1 +
                             bar_w * static_cast<double>(si);
            svg += "  <rect x=\"" + num(x) + "\" y=\"" + num(y0 - h) + "\" width=\"" +
                   num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"" + color + "\"/>\n";
            svg += "  <text x=\"" + num(x + bar_w / 2) + "\" y=\"" + num(y0 - h - 4) +
                   "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#333\">" + num(v) +
                   "</text>\n";
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = x0 + slot * (static_cast<double>(i) + 0.5);
        svg += "  <text x=\"" + num(x) + "\" y=\"" + num(y0 + 18) +
               "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#333\">" + categories[i] +
               "</text>\n";
    }
    // legend
    double lx = kLeft + 10;
    for (std::size_t si = 0; si < m; ++si) {
        svg += "  <rect x=\"" + num(lx) + "\" y=\"" + num(kTop - 14) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(kPalette[si % 5]) + "\"/>\n";
        svg += "  <text x=\"" + num(lx + 16) + "\" y=\"" + num(kTop - 4) +
               "\" font-size=\"12\" fill=\"#333\">" + series[si].name + "</text>\n";
        lx += 18 + 8.0 * static_cast<double>(series[si].name.size()) + 24;
    }
    svg += "</svg>\n";
    return svg;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::vector<LineSeries>& series) {
    if (series.empty()) throw ValidationError("svg_line_chart: no series");
    std::size_t n = 0;
    double max_value = 0.0;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (const double v : s.values) max_value = std::max(max_value, v);
    }
    if (n < 1) throw ValidationError("svg_line_chart: empty series");
    if (max_value <= 0.0) max_value = 1.0;

    std::string svg = header(title);
    axes(svg, max_value);

    const double x0 = kLeft;
    const double y0 = kHeight - kBottom;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = y0 - kTop;
    const double step = n > 1 ? plot_w / static_cast<double>(n - 1) : 0.0;

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % 5];
        const auto& vals = series[si].values;
        std::string points;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double x = x0 + step * static_cast<double>(i);
            const double y = y0 - plot_h * vals[i] / max_value;
            points += num(x) + "," + num(y) + " ";
            svg += "  <circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3\" fill=\"" + color +
                   "\"/>\n";
            svg += "  <text x=\"" + num(x) + "\" y=\"" + num(y - 8) +
                   "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#333\">" + num(vals[i]) +
                   "</text>\n";
        }
        svg += "  <polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = x0 + step * static_cast<double>(i);
        svg += "  <text x=\"" + num(x) + "\" y=\"" + num(y0 + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#333\">" + std::to_string(i) +
               "</text>\n";
    }
    svg += "  <text x=\"" + num(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" +
           num(kHeight - 16) + "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#333\">" +
           x_label + "</text>\n";
    double lx = kLeft + 10;
    for (std::size_t si = 0; si < series.size(); ++si) {
        svg += "  <rect x=\"" + num(lx) + "\" y=\"" + num(kTop - 14) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(kPalette[si % 5]) + "\"/>\n";
        svg += "  <text x=\"" + num(lx + 16) + "\" y=\"" + num(kTop - 4) +
               "\" font-size=\"12\" fill=\"#333\">" + series[si].name + "</text>\n";
        lx += 18 + 8.0 * static_cast<double>(series[si].name.size()) + 24;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace emint
