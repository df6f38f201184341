#pragma once

#include <string>
#include <vector>

namespace speclab {

// Tiny self-contained SVG plotting: line plots and heatmaps, nothing else.
// Every writer goes through write_text_atomic (temp + rename).

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool points = false; // draw markers instead of a connected path
};

struct SvgAxes {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::string annotation; // small print under the title (config hash etc.)
};

std::string render_line_plot(const SvgAxes& axes,
                             const std::vector<SvgSeries>& series);

// values row-major, iy * nx + ix, iy = 0 at y0 (bottom)
std::string render_heatmap(const SvgAxes& axes, int nx, int ny,
                           const std::vector<double>& values, double x0,
                           double x1, double y0, double y1);

void write_text_atomic(const std::string& path, const std::string& content);

} // namespace speclab
