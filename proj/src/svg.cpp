#include "speclab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "speclab/errors.hpp"

namespace speclab {

namespace {

constexpr double W = 720, H = 480;
constexpr double ML = 80, MR = 30, MT = 52, MB = 56; // margins

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else if (c == '&')
            out += "&amp;";
        else
            out += c;
    }
    return out;
}

struct AxisScale {
    double lo = 0, hi = 1;
    bool log = false;
    double map(double v, double p0, double p1) const {
        double t = log ? (std::log10(v) - std::log10(lo)) /
                             (std::log10(hi) - std::log10(lo))
                       : (v - lo) / (hi - lo);
        return p0 + t * (p1 - p0);
    }
    // round tick positions: decades in log mode, 1-2-5 ladder otherwise
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            int e0 = int(std::floor(std::log10(lo)));
            int e1 = int(std::ceil(std::log10(hi)));
            for (int e = e0; e <= e1; ++e) {
                double v = std::pow(10.0, e);
                if (v >= lo * 0.999 && v <= hi * 1.001)
                    out.push_back(v);
            }
            if (out.size() >= 2)
                return out;
            out.clear(); // narrow range: fall through to linear ticks
        }
        double span = hi - lo;
        if (span <= 0)
            return {lo};
        double raw = span / 5.0;
        double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        double first = std::ceil(lo / step) * step;
        for (double v = first; v <= hi + 0.5 * step; v += step)
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};

AxisScale fit_scale(double lo, double hi, bool log) {
    AxisScale s;
    s.log = log;
    if (log) {
        if (lo <= 0)
            lo = std::numeric_limits<double>::min();
        s.lo = lo;
        s.hi = (hi > lo) ? hi : lo * 10;
        return s;
    }
    if (hi <= lo)
        hi = lo + 1;
    double pad = 0.04 * (hi - lo);
    s.lo = lo - pad;
    s.hi = hi + pad;
    return s;
}

void frame_and_axes(std::string& svg, const SvgAxes& axes, const AxisScale& sx,
                    const AxisScale& sy) {
    svg += "<rect x='" + num(ML) + "' y='" + num(MT) + "' width='" +
           num(W - ML - MR) + "' height='" + num(H - MT - MB) +
           "' fill='white' stroke='#333'/>\n";
    for (double v : sx.ticks()) {
        double px = sx.map(v, ML, W - MR);
        if (px < ML - 0.5 || px > W - MR + 0.5)
            continue;
        svg += "<line x1='" + num(px) + "' y1='" + num(H - MB) + "' x2='" +
               num(px) + "' y2='" + num(H - MB + 5) + "' stroke='#333'/>\n";
        svg += "<line x1='" + num(px) + "' y1='" + num(MT) + "' x2='" +
               num(px) + "' y2='" + num(H - MB) +
               "' stroke='#ddd' stroke-width='0.5'/>\n";
        svg += "<text x='" + num(px) + "' y='" + num(H - MB + 18) +
               "' font-size='11' text-anchor='middle'>" + num(v) + "</text>\n";
    }
    for (double v : sy.ticks()) {
        double py = sy.map(v, H - MB, MT);
        if (py < MT - 0.5 || py > H - MB + 0.5)
            continue;
        svg += "<line x1='" + num(ML - 5) + "' y1='" + num(py) + "' x2='" +
               num(ML) + "' y2='" + num(py) + "' stroke='#333'/>\n";
        svg += "<line x1='" + num(ML) + "' y1='" + num(py) + "' x2='" +
               num(W - MR) + "' y2='" + num(py) +
               "' stroke='#ddd' stroke-width='0.5'/>\n";
        svg += "<text x='" + num(ML - 8) + "' y='" + num(py + 4) +
               "' font-size='11' text-anchor='end'>" + num(v) + "</text>\n";
    }
    svg += "<text x='" + num(0.5 * W) + "' y='22' font-size='15' "
           "text-anchor='middle'>" +
           esc(axes.title) + "</text>\n";
    if (!axes.annotation.empty())
        svg += "<text x='" + num(0.5 * W) +
               "' y='38' font-size='10' fill='#666' text-anchor='middle'>" +
               esc(axes.annotation) + "</text>\n";
    svg += "<text x='" + num(0.5 * W) + "' y='" + num(H - 12) +
           "' font-size='12' text-anchor='middle'>" + esc(axes.xlabel) +
           "</text>\n";
    svg += "<text x='16' y='" + num(0.5 * H) +
           "' font-size='12' text-anchor='middle' transform='rotate(-90 16 " +
           num(0.5 * H) + ")'>" + esc(axes.ylabel) + "</text>\n";
}

// 5-stop blue -> yellow colormap for heatmaps
std::string colormap(double t) {
    static const double stops[5][3] = {{68, 1, 84},
                                       {59, 82, 139},
                                       {33, 145, 140},
                                       {94, 201, 98},
                                       {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4;
    int i = std::min(3, int(t));
    double f = t - i;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  int(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                  int(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                  int(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

} // namespace

std::string render_line_plot(const SvgAxes& axes,
                             const std::vector<SvgSeries>& series) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (axes.logx && s.x[i] <= 0)
                continue;
            if (axes.logy && s.y[i] <= 0)
                continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    if (!(xlo < xhi))
        xlo = 0, xhi = 1;
    if (!(ylo <= yhi))
        ylo = 0, yhi = 1;
    AxisScale sx = fit_scale(xlo, xhi, axes.logx);
    AxisScale sy = fit_scale(ylo, yhi, axes.logy);

    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                      num(W) + "' height='" + num(H) +
                      "' font-family='sans-serif'>\n"
                      "<rect width='100%' height='100%' fill='white'/>\n";
    frame_and_axes(svg, axes, sx, sy);

    double ly = MT + 14;
    for (const auto& s : series) {
        std::string path;
        bool pen_up = true;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if ((axes.logx && s.x[i] <= 0) || (axes.logy && s.y[i] <= 0)) {
                pen_up = true;
                continue;
            }
            double px = sx.map(s.x[i], ML, W - MR);
            double py = sy.map(s.y[i], H - MB, MT);
            if (s.points) {
                svg += "<circle cx='" + num(px) + "' cy='" + num(py) +
                       "' r='2.5' fill='" + s.color + "'/>\n";
            } else {
                path += (pen_up ? "M" : "L") + num(px) + " " + num(py) + " ";
                pen_up = false;
            }
        }
        if (!path.empty())
            svg += "<path d='" + path + "' fill='none' stroke='" + s.color +
                   "' stroke-width='1.5'/>\n";
        if (!s.label.empty()) {
            svg += "<line x1='" + num(W - MR - 150) + "' y1='" + num(ly) +
                   "' x2='" + num(W - MR - 125) + "' y2='" + num(ly) +
                   "' stroke='" + s.color + "' stroke-width='2'/>\n";
            svg += "<text x='" + num(W - MR - 120) + "' y='" + num(ly + 4) +
                   "' font-size='11'>" + esc(s.label) + "</text>\n";
            ly += 16;
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_heatmap(const SvgAxes& axes, int nx, int ny,
                           const std::vector<double>& values, double x0,
                           double x1, double y0, double y1) {
    if (nx < 1 || ny < 1 || values.size() != size_t(nx) * size_t(ny))
        throw ConfigInvalid("heatmap dimensions do not match the value count");
    double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
    for (double v : values)
        if (std::isfinite(v)) {
            vlo = std::min(vlo, v);
            vhi = std::max(vhi, v);
        }
    if (!(vlo < vhi))
        vhi = vlo + 1;

    AxisScale sx{x0, x1, false}, sy{y0, y1, false};
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                      num(W) + "' height='" + num(H) +
                      "' font-family='sans-serif'>\n"
                      "<rect width='100%' height='100%' fill='white'/>\n";
    double cw = (W - ML - MR) / nx, ch = (H - MT - MB) / ny;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            double v = values[size_t(iy) * nx + ix];
            double t = std::isfinite(v) ? (v - vlo) / (vhi - vlo) : 0.0;
            // iy = 0 is the bottom row
            svg += "<rect x='" + num(ML + ix * cw) + "' y='" +
                   num(H - MB - (iy + 1) * ch) + "' width='" + num(cw + 0.5) +
                   "' height='" + num(ch + 0.5) + "' fill='" + colormap(t) +
                   "'/>\n";
        }
    frame_and_axes(svg, axes, sx, sy);
    svg += "<text x='" + num(W - MR) + "' y='" + num(MT - 6) +
           "' font-size='10' text-anchor='end'>range [" + num(vlo) + ", " +
           num(vhi) + "]</text>\n";
    svg += "</svg>\n";
    return svg;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out)
            throw Error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace speclab
