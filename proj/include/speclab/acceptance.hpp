#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "speclab/montecarlo.hpp"

namespace speclab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double measured = 0.0; // the headline number the bound applies to
    double bound = 0.0;
    std::string details;
};

struct AcceptanceOptions {
    // scratch directory; the Monte-Carlo batch is cached and resumed here,
    // so rerunning the suite only recomputes the cheap criteria
    std::string work_dir = "acceptance_work";
    TrialConfig mc; // the desk-scale ensemble behind criteria 2-4
    std::ostream* log = nullptr; // progress lines, optional
};

// the canonical desk-scale run: h = 0.02, Omega = [-0.5,0.5]^2,
// eps0_coeff = 6, padded out to the g2 analysis window
AcceptanceOptions default_acceptance_options();

// Runs all eleven criteria in order; never throws (a criterion that throws
// is reported as failed with the message in details).
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

std::string format_criterion(const CriterionResult& c); // one pass/fail line
std::string acceptance_json(const std::vector<CriterionResult>& results,
                            const std::string& config_hash);
bool all_pass(const std::vector<CriterionResult>& results);

} // namespace speclab
