#include <doctest.h>

#include <filesystem>
#include <iostream>

#include "speclab/acceptance.hpp"

using namespace speclab;

// The full exit gate: one pass/fail line per criterion on stdout. The
// Monte-Carlo ensemble is cached in a persistent scratch directory, so a
// rerun after an interrupt resumes instead of starting over.
TEST_CASE("acceptance suite") {
    AcceptanceOptions opt = default_acceptance_options();
    opt.work_dir = (std::filesystem::temp_directory_path() /
                    "speclab_acceptance_cache")
                       .string();
    opt.log = &std::cout;
    auto results = run_acceptance(opt);
    REQUIRE(results.size() == 11);
    for (const auto& c : results) {
        INFO(format_criterion(c));
        CHECK(c.pass);
    }
    CHECK(all_pass(results));

    // report serialization carries every field
    std::string j = acceptance_json(results, opt.mc.hash());
    CHECK(j.find("\"all_pass\"") != std::string::npos);
    CHECK(j.find("\"criteria\"") != std::string::npos);
}
