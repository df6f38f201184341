#pragma once

#include <string>
#include <vector>

#include "speclab/density.hpp"
#include "speclab/records.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

struct WeylCount {
    double mean = 0.0;
    double stderr_ = 0.0;
    int trials = 0;
};

// sample mean / standard error of per-trial eigenvalue counts in a window
WeylCount weyl_count(const std::vector<EigenRecord>& records,
                     const SpectralWindow& window);

struct IntensityGrid {
    SpectralWindow window;
    int nx = 0, ny = 0;
    int trials = 0;
    std::vector<double> counts;  // nx*ny, row-major (ix + nx*iy)
    std::vector<double> density; // counts / (trials * bin area)
    std::vector<double> stderr_; // Poisson-style per-bin standard error
    long total = 0;

    double bin_area() const {
        return (window.re_hi - window.re_lo) * (window.im_hi - window.im_lo) /
               double(nx * ny);
    }
};

IntensityGrid intensity_grid(const std::vector<EigenRecord>& records,
                             const SpectralWindow& window, int nx, int ny);

enum class EdgeCorrection { erosion, translation };

struct PairCorrelation {
    std::vector<double> r_lo, r_hi, r_mid;
    std::vector<double> g2;
    std::vector<double> stderr_;
    std::vector<double> pair_counts;
    double mean_intensity = 0.0; // d-bar over the analysis window
    double eroded_area = 0.0;    // erosion mode; full area in translation mode
    EdgeCorrection correction = EdgeCorrection::erosion;
    int trials = 0;
};

// geometric radial bins between 0.1 sqrt(h) and 6 sqrt(h ln(1/h)) by default
std::vector<double> default_r_bins(double h, int n_bins = 24,
                                   double r_min_factor = 0.1,
                                   double r_max = 0.0);

PairCorrelation pair_correlation(const std::vector<EigenRecord>& records,
                                 const SpectralWindow& window,
                                 const std::vector<double>& r_edges,
                                 EdgeCorrection correction =
                                     EdgeCorrection::erosion);

// theory curve matched to the radial estimator: window-averaged
// D(z, z + r e^{i theta}) / d-bar^2
std::vector<double> g2_theory(const SymbolFunction& g, const DensityModel& m,
                              const SpectralWindow& window,
                              const std::vector<double>& r_mid);

struct CompareReport {
    std::string config_hash;
    double h = 0.0;
    std::vector<double> r_mid, g2_emp, g2_th, z_scores;
    double repulsion_slope = 0.0;   // log-log fit over [0.2 sqrt h, sqrt h]
    double plateau_ratio = 0.0;     // mean g2 over long-range bins
    double weyl_mean = 0.0, weyl_expected = 0.0;
    std::string to_json() const;
    static CompareReport from_json(const std::string& text);
};

CompareReport compare_report(const PairCorrelation& pc, const WeylCount& wc,
                             const SymbolFunction& g, const DensityModel& m,
                             const SpectralWindow& window,
                             const std::string& config_hash);

struct LinearFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y);

} // namespace speclab
