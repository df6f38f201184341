#include <doctest.h>

#include <complex>

#include "speclab/operator.hpp"
#include "speclab/spectral.hpp"

using namespace speclab;

namespace {
SymbolFunction shifted_two_mode() {
    return SymbolFunction::from_modes(
        {{0, {0.5, 0.25}}, {1, {1.0, 0.0}}, {2, {0.3, 0.0}}});
}
} // namespace

TEST_CASE("unperturbed matrix structure for the default symbol") {
    auto g = default_symbol();
    auto P = build_unperturbed(g, 0.1, {2});
    REQUIRE(P.matrix.rows() == 5);
    // descending mode order: diagonal h*(M-i), single superdiagonal band
    for (int i = 0; i < 5; ++i)
        CHECK(P.matrix(i, i) == Complex(0.1 * (2 - i), 0.0));
    for (int i = 0; i < 4; ++i)
        CHECK(P.matrix(i, i + 1) == Complex(1.0, 0.0));
    for (int j = 0; j < 5; ++j)
        for (int i = j + 1; i < 5; ++i)
            CHECK(P.matrix(i, j) == Complex(0.0, 0.0));

    auto es = eigenvalues(P.matrix);
    std::vector<double> want = {-0.2, -0.1, 0.0, 0.1, 0.2};
    for (int i = 0; i < 5; ++i) {
        CHECK(es.values[i].real() == doctest::Approx(want[i]).epsilon(1e-15));
        CHECK(es.values[i].imag() == 0.0);
    }
}

TEST_CASE("trace identity: trace = (2M+1) * mean(g)") {
    auto g = shifted_two_mode();
    auto P = build_unperturbed(g, 0.07, {9});
    Complex tr = P.matrix.trace();
    Complex want = double(P.trunc.dim()) * g.mean();
    CHECK(std::abs(tr - want) < 1e-12);
}

TEST_CASE("truncation validation") {
    auto g = default_symbol();
    CHECK_THROWS_AS(build_unperturbed(g, 0.1, {0}), TruncationTooSmall);
    FourierTruncation t = FourierTruncation::for_params(g, 0.1, 2.0);
    CHECK(t.M == 20 + 1 + 8);
    CHECK_NOTHROW(t.validate(g, 0.1, 2.0));
    CHECK_THROWS_AS(FourierTruncation{15}.validate(g, 0.1, 2.0),
                    TruncationTooSmall);
}

TEST_CASE("Galerkin consistency: doubling M leaves interior eigenvalues") {
    auto g = default_symbol();
    const double h = 0.1;
    auto P1 = build_unperturbed(g, h, {15});
    auto P2 = build_unperturbed(g, h, {30});
    auto e1 = eigenvalues(P1.matrix);
    auto e2 = eigenvalues(P2.matrix);
    // compare eigenvalues inside |Re| <= 0.5 (attached to interior modes)
    for (Complex v : e1.values) {
        if (std::abs(v.real()) > 0.5)
            continue;
        double best = 1e9;
        for (Complex w : e2.values)
            best = std::min(best, std::abs(v - w));
        CHECK(best < 1e-10);
    }
}

TEST_CASE("perturbation draw: determinism and law") {
    auto d1 = draw_perturbation(12345, 0.5, 2.0, 8.0);
    auto d2 = draw_perturbation(12345, 0.5, 2.0, 8.0);
    CHECK(d1.alpha == d2.alpha);
    CHECK(d1.K == 4);

    auto d3 = draw_perturbation(12346, 0.5, 2.0, 8.0);
    CHECK(d1.alpha != d3.alpha);

    // E|alpha|^2 = 1: 1e4 draws of a 5x5 block -> 2.5e5 samples
    double acc = 0.0;
    long n = 0;
    for (int s = 0; s < 10000; ++s) {
        auto d = draw_perturbation(trial_seed(777, s), 1.0 - 1e-9, 2.0, 1e9);
        acc += d.norm * d.norm;
        n += d.alpha.size();
    }
    CHECK(acc / double(n) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("ball restriction: rare rejections at calibrated C_ball") {
    int rejected = 0;
    for (int s = 0; s < 1000; ++s) {
        auto d = draw_perturbation(trial_seed(31337, s), 0.25, 2.0, 8.0);
        if (!d.accepted)
            ++rejected;
    }
    CHECK(rejected < 10); // < 1%
}

TEST_CASE("draw_accepted: resample policy") {
    // R = 4 at h = 1, block norm ~ sqrt(25) = 5: rejections happen but the
    // policy eventually accepts
    auto d = draw_accepted(99, 1.0 - 1e-9, 2.0, 4.0, 1000);
    CHECK(d.accepted);
    CHECK(d.norm <= 4.0);
    // impossible ball -> RejectedDraw after max_tries
    CHECK_THROWS_AS(draw_accepted(99, 1.0 - 1e-9, 2.0, 0.01, 16), RejectedDraw);
}

TEST_CASE("delta_from_hypothesis") {
    auto g = default_symbol();
    SpectralWindow w{-0.5, 0.5, -0.5, 0.5, 0.1};
    auto v = delta_from_hypothesis(0.02, 6.0, g, w);
    // sqrt(0.02) * 0.02^6 = 9.0510e-12
    CHECK(v.delta == doctest::Approx(9.0510e-12).epsilon(1e-4));
    CHECK(v.upper_cap == doctest::Approx(std::pow(0.02, 5.1)).epsilon(1e-12));
    CHECK(v.upper_ok);
    // min_Omega S = S(0.5) ~ 0.6849, barrier ~ sqrt(h) e^{-S/(10h)} ~ 4.6e-3
    CHECK(v.min_action == doctest::Approx(0.68490).epsilon(1e-4));
    CHECK_FALSE(v.lower_ok); // desk-scale h: admissible window is empty
    CHECK_THROWS_AS(delta_from_hypothesis(0.02, 6.0, g, w, 10.0, true),
                    DeltaWindowEmpty);
    CHECK_THROWS_AS(delta_from_hypothesis(1.5, 6.0, g, w), ConfigInvalid);
}

TEST_CASE("assemble_perturbed") {
    auto g = default_symbol();
    const double h = 0.25;
    auto P0 = build_unperturbed(g, h, FourierTruncation::for_params(g, h, 2.0));
    auto d = draw_accepted(4242, h, 2.0, 8.0);

    SUBCASE("zero coupling is the identity operation") {
        auto P = assemble_perturbed(P0, d, 0.0);
        CHECK(P.matrix == P0.matrix);
    }
    SUBCASE("additivity in delta") {
        auto Pa = assemble_perturbed(P0, d, 3e-3);
        auto Pstage = assemble_perturbed(assemble_perturbed(P0, d, 1e-3), d, 2e-3);
        CHECK((Pa.matrix - Pstage.matrix).norm() < 1e-15 * P0.matrix.norm());
    }
    SUBCASE("block support and Frobenius norm of the increment") {
        const double delta = 1e-4;
        auto P = assemble_perturbed(P0, d, delta);
        Matrix diff = P.matrix - P0.matrix;
        CHECK(diff.norm() == doctest::Approx(delta * d.norm).epsilon(1e-12));
        const int K = d.K;
        for (int i = 0; i < P0.trunc.dim(); ++i)
            for (int j = 0; j < P0.trunc.dim(); ++j) {
                int mi = P0.trunc.mode_of(i), mj = P0.trunc.mode_of(j);
                if (std::abs(mi) > K || std::abs(mj) > K)
                    CHECK(diff(i, j) == Complex(0.0, 0.0));
            }
    }
    SUBCASE("unaccepted draw is refused") {
        PerturbationDraw bad = d;
        bad.accepted = false;
        CHECK_THROWS_AS(assemble_perturbed(P0, bad, 1e-4), RejectedDraw);
    }
}
