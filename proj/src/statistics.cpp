#include "speclab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include <json.hpp>

#include "speclab/errors.hpp"
#include "speclab/quadrature.hpp"

using nlohmann::json;

namespace speclab {

LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LinearFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0 || x.size() < 2)
        return f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double num = n * sxy - sx * sy;
    double vden = den * (n * syy - sy * sy);
    f.r2 = vden > 0 ? num * num / vden : 1.0;
    return f;
}

WeylCount weyl_count(const std::vector<EigenRecord>& records,
                     const SpectralWindow& window) {
    if (records.size() < 30)
        throw TooFewTrials("weyl_count needs at least 30 trials, got " +
                           std::to_string(records.size()));
    WeylCount w;
    w.trials = int(records.size());
    std::vector<double> counts;
    counts.reserve(records.size());
    for (const auto& r : records) {
        int c = 0;
        for (const auto& z : r.eigs)
            if (window.contains(z))
                ++c;
        counts.push_back(double(c));
        w.mean += c;
    }
    w.mean /= double(counts.size());
    double var = 0;
    for (double c : counts)
        var += (c - w.mean) * (c - w.mean);
    var /= std::max<size_t>(1, counts.size() - 1);
    w.stderr_ = std::sqrt(var / double(counts.size()));
    return w;
}

IntensityGrid intensity_grid(const std::vector<EigenRecord>& records,
                             const SpectralWindow& window, int nx, int ny) {
    if (records.empty())
        throw EmptyRecords("no records to bin");
    if (nx < 1 || ny < 1)
        throw ConfigInvalid("intensity grid needs positive bin counts");
    IntensityGrid g;
    g.window = window;
    g.nx = nx;
    g.ny = ny;
    g.trials = int(records.size());
    g.counts.assign(size_t(nx) * ny, 0.0);
    const double wx = window.re_hi - window.re_lo;
    const double wy = window.im_hi - window.im_lo;
    if (wx <= 0 || wy <= 0) {
        g.density = g.counts;
        g.stderr_ = g.counts;
        return g; // empty window: all zeros
    }
    for (const auto& r : records)
        for (const auto& z : r.eigs) {
            if (!window.contains(z))
                continue;
            int ix = std::min(nx - 1, int((z.real() - window.re_lo) / wx * nx));
            int iy = std::min(ny - 1, int((z.imag() - window.im_lo) / wy * ny));
            g.counts[size_t(ix) + size_t(nx) * iy] += 1.0;
            ++g.total;
        }
    const double area = g.bin_area();
    g.density.resize(g.counts.size());
    g.stderr_.resize(g.counts.size());
    for (size_t i = 0; i < g.counts.size(); ++i) {
        g.density[i] = g.counts[i] / (g.trials * area);
        g.stderr_[i] = std::sqrt(std::max(g.counts[i], 1.0)) / (g.trials * area);
    }
    return g;
}

std::vector<double> default_r_bins(double h, int n_bins, double r_min_factor,
                                   double r_max) {
    if (r_max <= 0)
        r_max = 6.0 * std::sqrt(h * std::log(1.0 / h));
    const double r_min = r_min_factor * std::sqrt(h);
    std::vector<double> edges(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i)
        edges[i] = r_min * std::pow(r_max / r_min, double(i) / n_bins);
    return edges;
}

namespace {

// area of W cap (W - u) for an a x b rectangle, |u| = r at angle theta
double set_covariance(double a, double b, double r, double th) {
    double dx = std::abs(r * std::cos(th));
    double dy = std::abs(r * std::sin(th));
    if (dx >= a || dy >= b)
        return 0.0;
    return (a - dx) * (b - dy);
}

} // namespace

PairCorrelation pair_correlation(const std::vector<EigenRecord>& records,
                                 const SpectralWindow& window,
                                 const std::vector<double>& r_edges,
                                 EdgeCorrection correction) {
    if (records.empty())
        throw EmptyRecords("no records");
    if (r_edges.size() < 2)
        throw ConfigInvalid("need at least one radial bin");
    for (size_t i = 1; i < r_edges.size(); ++i)
        if (r_edges[i] <= r_edges[i - 1])
            throw ConfigInvalid("radial bin edges must be strictly increasing");

    const int nb = int(r_edges.size()) - 1;
    const double rmax = r_edges.back();
    const double a = window.re_hi - window.re_lo;
    const double b = window.im_hi - window.im_lo;
    const double area = a * b;

    PairCorrelation pc;
    pc.correction = correction;
    pc.trials = int(records.size());
    pc.r_lo.assign(r_edges.begin(), r_edges.end() - 1);
    pc.r_hi.assign(r_edges.begin() + 1, r_edges.end());
    for (int i = 0; i < nb; ++i)
        pc.r_mid.push_back(std::sqrt(pc.r_lo[i] * pc.r_hi[i]));

    // mean intensity over the analysis window
    long total = 0;
    for (const auto& r : records)
        for (const auto& z : r.eigs)
            if (window.contains(z))
                ++total;
    pc.mean_intensity = double(total) / (pc.trials * area);
    const double dbar = pc.mean_intensity;
    if (dbar <= 0)
        throw EmptyRecords("window holds no eigenvalues");

    // geometric normalization per bin (pairs expected per trial for a
    // unit-intensity Poisson process, divided by intensity^2)
    std::vector<double> geom(nb, 0.0);
    if (correction == EdgeCorrection::erosion) {
        const double ea = a - 2 * rmax, eb = b - 2 * rmax;
        if (ea <= 0 || eb <= 0)
            throw ErosionTooLarge("max radius " + std::to_string(rmax) +
                                  " erodes the window away");
        pc.eroded_area = ea * eb;
        for (int i = 0; i < nb; ++i)
            geom[i] = pc.eroded_area * std::numbers::pi *
                      (pc.r_hi[i] * pc.r_hi[i] - pc.r_lo[i] * pc.r_lo[i]);
    } else {
        pc.eroded_area = area;
        for (int i = 0; i < nb; ++i)
            geom[i] = integrate(
                [&](double r) {
                    double th_int = integrate(
                        [&](double th) { return set_covariance(a, b, r, th); },
                        0.0, 2 * std::numbers::pi, 1e-9 * area);
                    return r * th_int;
                },
                pc.r_lo[i], pc.r_hi[i], 1e-9 * area * rmax);
    }

    const SpectralWindow eroded{window.re_lo + rmax, window.re_hi - rmax,
                                window.im_lo + rmax, window.im_hi - rmax,
                                window.margin};

    // ordered-pair counts per (trial, bin)
    std::vector<std::vector<double>> per_trial(records.size(),
                                               std::vector<double>(nb, 0.0));
    for (size_t t = 0; t < records.size(); ++t) {
        const auto& eig = records[t].eigs;
        for (size_t i = 0; i < eig.size(); ++i) {
            const bool center_ok = (correction == EdgeCorrection::erosion)
                                       ? eroded.contains(eig[i])
                                       : window.contains(eig[i]);
            if (!center_ok)
                continue;
            for (size_t j = 0; j < eig.size(); ++j) {
                if (i == j)
                    continue;
                if (correction == EdgeCorrection::translation &&
                    !window.contains(eig[j]))
                    continue;
                double d = std::abs(eig[i] - eig[j]);
                if (d < r_edges.front() || d >= rmax)
                    continue;
                int bin = int(std::upper_bound(r_edges.begin(), r_edges.end(),
                                               d) -
                              r_edges.begin()) -
                          1;
                if (bin >= 0 && bin < nb)
                    per_trial[t][bin] += 1.0;
            }
        }
    }

    pc.pair_counts.assign(nb, 0.0);
    pc.g2.assign(nb, 0.0);
    pc.stderr_.assign(nb, 0.0);
    for (int i = 0; i < nb; ++i) {
        double mean = 0.0;
        for (size_t t = 0; t < records.size(); ++t) {
            pc.pair_counts[i] += per_trial[t][i];
            mean += per_trial[t][i] / (dbar * dbar * geom[i]);
        }
        mean /= double(records.size());
        pc.g2[i] = mean;
        double var = 0.0;
        for (size_t t = 0; t < records.size(); ++t) {
            double v = per_trial[t][i] / (dbar * dbar * geom[i]) - mean;
            var += v * v;
        }
        var /= std::max<size_t>(1, records.size() - 1);
        pc.stderr_[i] = std::sqrt(var / double(records.size()));
    }
    return pc;
}

std::vector<double> g2_theory(const SymbolFunction& g, const DensityModel& m,
                              const SpectralWindow& window,
                              const std::vector<double>& r_mid) {
    const int nz = 7, nth = 12;
    std::vector<Complex> zs;
    for (int ix = 0; ix < nz; ++ix)
        for (int iy = 0; iy < nz; ++iy)
            zs.emplace_back(
                window.re_lo +
                    (window.re_hi - window.re_lo) * (ix + 0.5) / nz,
                window.im_lo +
                    (window.im_hi - window.im_lo) * (iy + 0.5) / nz);
    double dbar = 0.0;
    for (Complex z : zs)
        dbar += one_point_density(g, z, m);
    dbar /= double(zs.size());

    std::vector<double> out;
    out.reserve(r_mid.size());
    for (double r : r_mid) {
        double acc = 0.0;
        long n = 0;
        for (Complex z : zs)
            for (int it = 0; it < nth; ++it) {
                double th = 2 * std::numbers::pi * (it + 0.5) / nth;
                Complex w = z + std::polar(r, th);
                if (!g.in_band(w.imag()))
                    continue;
                double D;
                try {
                    D = two_point_density(g, z, w, m);
                } catch (const PairTooFar&) {
                    D = one_point_density(g, z, m) *
                        one_point_density(g, w, m);
                }
                acc += D;
                ++n;
            }
        out.push_back(n ? acc / (double(n) * dbar * dbar) : 1.0);
    }
    return out;
}

std::string CompareReport::to_json() const {
    json j;
    j["config_hash"] = config_hash;
    j["h"] = h;
    j["r_mid"] = r_mid;
    j["g2_empirical"] = g2_emp;
    j["g2_theory"] = g2_th;
    j["z_scores"] = z_scores;
    j["repulsion_slope"] = repulsion_slope;
    j["plateau_ratio"] = plateau_ratio;
    j["weyl_mean"] = weyl_mean;
    j["weyl_expected"] = weyl_expected;
    return j.dump(2);
}

CompareReport CompareReport::from_json(const std::string& text) {
    json j = json::parse(text);
    CompareReport r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.h = j.at("h").get<double>();
    r.r_mid = j.at("r_mid").get<std::vector<double>>();
    r.g2_emp = j.at("g2_empirical").get<std::vector<double>>();
    r.g2_th = j.at("g2_theory").get<std::vector<double>>();
    r.z_scores = j.at("z_scores").get<std::vector<double>>();
    r.repulsion_slope = j.at("repulsion_slope").get<double>();
    r.plateau_ratio = j.at("plateau_ratio").get<double>();
    r.weyl_mean = j.at("weyl_mean").get<double>();
    r.weyl_expected = j.at("weyl_expected").get<double>();
    return r;
}

CompareReport compare_report(const PairCorrelation& pc, const WeylCount& wc,
                             const SymbolFunction& g, const DensityModel& m,
                             const SpectralWindow& window,
                             const std::string& config_hash) {
    if (pc.r_mid.empty())
        throw EmptyRecords("pair correlation has no bins");
    CompareReport rep;
    rep.config_hash = config_hash;
    rep.h = m.h;
    rep.r_mid = pc.r_mid;
    rep.g2_emp = pc.g2;
    rep.g2_th = g2_theory(g, m, window, pc.r_mid);
    rep.z_scores.resize(pc.g2.size());
    for (size_t i = 0; i < pc.g2.size(); ++i)
        rep.z_scores[i] = pc.stderr_[i] > 0
                              ? (pc.g2[i] - rep.g2_th[i]) / pc.stderr_[i]
                              : 0.0;

    // quadratic-repulsion fit on log-log over [0.2 sqrt h, sqrt h]
    std::vector<double> lx, ly;
    for (size_t i = 0; i < pc.r_mid.size(); ++i)
        if (pc.r_mid[i] >= 0.2 * std::sqrt(m.h) &&
            pc.r_mid[i] <= std::sqrt(m.h) && pc.g2[i] > 0)
            lx.push_back(std::log(pc.r_mid[i])),
                ly.push_back(std::log(pc.g2[i]));
    rep.repulsion_slope = linear_fit(lx, ly).slope;

    // plateau over long-range bins
    double plat = 0.0;
    int np = 0;
    double thresh = std::sqrt(m.h * std::log(1.0 / m.h));
    for (size_t i = 0; i < pc.r_mid.size(); ++i)
        if (pc.r_mid[i] >= thresh) {
            plat += pc.g2[i];
            ++np;
        }
    rep.plateau_ratio = np ? plat / np : 0.0;

    rep.weyl_mean = wc.mean;
    rep.weyl_expected =
        symplectic_volume(g, window) / (2 * std::numbers::pi * m.h);
    return rep;
}

} // namespace speclab
