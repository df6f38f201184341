#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "speclab/operator.hpp"
#include "speclab/records.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

enum class DeltaMode { hypothesis, zero, fixed };

struct TrialConfig {
    std::vector<SymbolFunction::Mode> symbol_modes = {{1, {1.0, 0.0}}};
    double h = 0.02;
    double C1 = 2.0;
    double C_ball = 5.0;
    double eps0_coeff = 6.0;
    DeltaMode delta_mode = DeltaMode::hypothesis;
    double delta_fixed = 0.0;
    SpectralWindow window{-0.5, 0.5, -0.5, 0.5, 0.1};
    double pad_re = 0.0; // padded window: Omega dilated for edge statistics
    double pad_im = 0.0;
    int trial_count = 200;
    std::uint64_t master_seed = 1;
    int truncation_M = 0; // 0: rule floor(C1/h) + M_g + 8
    int workers = 1;
    int dim_cap = 1200;

    SymbolFunction symbol() const {
        return SymbolFunction::from_modes(symbol_modes);
    }
    SpectralWindow padded() const { return window.dilated(pad_re, pad_im); }
    int effective_M(const SymbolFunction& g) const {
        return truncation_M > 0
                   ? truncation_M
                   : FourierTruncation::for_params(g, h, C1).M;
    }
    double delta(const SymbolFunction& g) const;
    // runs the (H.1)/(H.2)/(H.3) and sizing validators; throws ConfigInvalid
    // (or the specific error) naming the violated hypothesis
    void validate() const;
    std::string canonical_string() const; // workers excluded (no effect on data)
    std::string hash() const;
};

EigenRecord run_trial(const TrialConfig& cfg, int trial_index);

struct BatchResult {
    RunManifest manifest;
    std::string records_path;
    std::string manifest_path;
    int newly_run = 0;
    int failed_count = 0;
};

// Executes missing trials, appending records in strict index order so the
// file is byte-identical across thread budgets and across interrupt/resume.
BatchResult run_batch(const TrialConfig& cfg, const std::string& out_dir);

} // namespace speclab
