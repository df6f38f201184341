#pragma once

#include <string>
#include <vector>

#include "speclab/montecarlo.hpp"
#include "speclab/statistics.hpp"

namespace speclab {

// Subcommand-specific knobs. Each maps to one [section] of the config file;
// see configs/default.ini for the documented schema.

struct StatsOptions {
    int grid_nx = 8, grid_ny = 8;
    int r_bins = 24;
    EdgeCorrection correction = EdgeCorrection::translation;
};

struct TheoryOptions {
    double w0_im = 0.0;  // conditioning point w0 = i * w0_im
    double r_min = 0.0;  // 0: 0.05 * sqrt(h)
    double r_max = 0.0;  // 0: min(6 sqrt(h ln 1/h), 0.45 * band width)
    int points = 200;
};

struct GramianOptions {
    double h = 0.1; // own h: the overlap sweep has its own scale
    std::vector<double> heights = {-0.2, -0.1, 0.0, 0.1, 0.2};
    double ratio_lo = 0.5, ratio_hi = 3.0; // |z-w| / sqrt(h)
    int n_ratios = 9;
    double step = 1e-4; // finite-difference step for dX/dz
};

struct PseudospectrumOptions {
    double h = 0.1;
    double re_lo = -1.5, re_hi = 1.5, im_lo = -1.2, im_hi = 1.2;
    int nx = 61, ny = 49;
};

struct RunConfig {
    TrialConfig trial;
    std::string out_dir = "out";
    StatsOptions stats;
    TheoryOptions theory;
    GramianOptions gramian;
    PseudospectrumOptions pseudo;

    // Parses the sectioned key/value format. Unknown sections or keys are
    // errors (ConfigInvalid) so typos never silently fall back to defaults.
    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
};

} // namespace speclab
