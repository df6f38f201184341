#include <doctest.h>

#include <cmath>
#include <random>

#include "speclab/statistics.hpp"

using namespace speclab;

namespace {

// synthetic homogeneous Poisson process of known intensity: the estimator
// calibration oracle
std::vector<EigenRecord> poisson_records(int trials, double intensity,
                                         const SpectralWindow& w,
                                         unsigned seed) {
    std::mt19937 gen(seed);
    std::poisson_distribution<int> pois(intensity * w.area());
    std::uniform_real_distribution<double> ux(w.re_lo, w.re_hi),
        uy(w.im_lo, w.im_hi);
    std::vector<EigenRecord> out;
    for (int t = 0; t < trials; ++t) {
        EigenRecord r;
        r.trial_index = t;
        int n = pois(gen);
        for (int i = 0; i < n; ++i)
            r.eigs.emplace_back(ux(gen), uy(gen));
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace

TEST_CASE("weyl_count") {
    SpectralWindow big{0.0, 2.0, 0.0, 1.0, 0.1};
    auto recs = poisson_records(400, 100.0, big, 11);

    CHECK_THROWS_AS(
        weyl_count(std::vector<EigenRecord>(recs.begin(), recs.begin() + 10),
                   big),
        TooFewTrials);

    auto wc = weyl_count(recs, big);
    CHECK(std::abs(wc.mean - 200.0) < 3 * wc.stderr_);

    // doubling the Re-extent doubles the mean
    SpectralWindow half{0.0, 1.0, 0.0, 1.0, 0.1};
    auto wh = weyl_count(recs, half);
    CHECK(wc.mean / wh.mean == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("intensity_grid") {
    SpectralWindow w{0.0, 2.0, 0.0, 1.0, 0.1};
    auto recs = poisson_records(200, 100.0, w, 5);

    auto grid = intensity_grid(recs, w, 8, 8);
    CHECK(grid.total > 0);
    int bad = 0;
    for (size_t i = 0; i < grid.density.size(); ++i)
        if (std::abs(grid.density[i] - 100.0) > 3 * grid.stderr_[i])
            ++bad;
    // >= 95% of 64 bins within 3 sigma
    CHECK(bad <= 3);

    // conservation
    double sum = 0;
    for (double c : grid.counts)
        sum += c;
    CHECK(sum == doctest::Approx(double(grid.total)));

    CHECK_THROWS_AS(intensity_grid({}, w, 8, 8), EmptyRecords);

    SpectralWindow empty{1.0, 1.0, 0.0, 0.0, 0.1};
    auto zg = intensity_grid(recs, empty, 4, 4);
    for (double d : zg.density)
        CHECK(d == 0.0);
}

TEST_CASE("default radial bins") {
    auto e = default_r_bins(0.02);
    CHECK(e.size() == 25);
    CHECK(e.front() == doctest::Approx(0.1 * std::sqrt(0.02)).epsilon(1e-12));
    CHECK(e.back() ==
          doctest::Approx(6 * std::sqrt(0.02 * std::log(50.0))).epsilon(1e-12));
    for (size_t i = 1; i < e.size(); ++i)
        CHECK(e[i] > e[i - 1]);
}

TEST_CASE("pair correlation calibrates to 1 on Poisson input") {
    SpectralWindow w{0.0, 2.0, 0.0, 1.0, 0.1};
    auto recs = poisson_records(300, 40.0, w, 23);
    auto edges = default_r_bins(0.02, 16, 0.5, 0.25);

    for (EdgeCorrection ec :
         {EdgeCorrection::erosion, EdgeCorrection::translation}) {
        auto pc = pair_correlation(recs, w, edges, ec);
        int bad = 0;
        for (size_t i = 0; i < pc.g2.size(); ++i)
            if (std::abs(pc.g2[i] - 1.0) > 3 * pc.stderr_[i])
                ++bad;
        CHECK(bad <= 1); // >= 95% of 16 bins
        // ordered pairs: totals are even when both endpoints qualify
        if (ec == EdgeCorrection::translation)
            for (double c : pc.pair_counts)
                CHECK(std::fmod(c, 2.0) == 0.0);
    }

    // erosion too large for the window
    std::vector<double> huge = {0.1, 0.6};
    CHECK_THROWS_AS(pair_correlation(recs, w, huge, EdgeCorrection::erosion),
                    ErosionTooLarge);
    CHECK_THROWS_AS(
        pair_correlation({}, w, edges, EdgeCorrection::erosion), EmptyRecords);
}

TEST_CASE("g2 theory curve: quadratic rise and long-range plateau") {
    auto g = default_symbol();
    DensityModel m{0.01, 0.0, 1.0};
    SpectralWindow w{-0.3, 0.3, -0.3, 0.3, 0.1};
    std::vector<double> r = {0.02, 0.04, 0.3, 0.4};
    auto th = g2_theory(g, m, w, r);
    // short range: g2 ~ K ~ r^2 -> ratio of the first two ~ 4
    CHECK(th[1] / th[0] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(th[2] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(th[3] == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("compare_report: self-comparison and round trip") {
    auto g = default_symbol();
    DensityModel m{0.02, 0.0, 1.0};
    SpectralWindow w{-0.5, 0.5, -0.5, 0.5, 0.1};

    PairCorrelation pc;
    pc.r_mid = {0.02, 0.05, 0.1, 0.3, 0.5};
    pc.r_lo = pc.r_hi = pc.r_mid;
    pc.g2 = g2_theory(g, m, w, pc.r_mid); // theory against itself
    pc.stderr_.assign(pc.r_mid.size(), 0.05);
    pc.trials = 100;

    WeylCount wc;
    wc.mean = 16.7;
    wc.trials = 100;

    auto rep = compare_report(pc, wc, g, m, w, "deadbeef00000000");
    for (double z : rep.z_scores)
        CHECK(std::abs(z) < 1e-12);
    CHECK(rep.weyl_expected == doctest::Approx(16.666).epsilon(1e-3));

    auto back = CompareReport::from_json(rep.to_json());
    CHECK(back.config_hash == rep.config_hash);
    CHECK(back.h == rep.h);
    CHECK(back.z_scores.size() == rep.z_scores.size());
    CHECK(back.repulsion_slope == rep.repulsion_slope);
    CHECK(back.plateau_ratio == doctest::Approx(rep.plateau_ratio));
}
