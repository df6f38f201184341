#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "speclab/gramian.hpp"
#include "speclab/operator.hpp"

using namespace speclab;

namespace {

Matrix default_matrix(double h) {
    auto g = default_symbol();
    return build_unperturbed(g, h, FourierTruncation::for_params(g, h, 2.0))
        .matrix;
}

// Ryser's formula, independent permanent oracle
Complex ryser(const Matrix& A) {
    const int n = int(A.rows());
    Complex total = 0.0;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        Complex prod = 1.0;
        for (int i = 0; i < n; ++i) {
            Complex row = 0.0;
            for (int j = 0; j < n; ++j)
                if (mask & (1u << j))
                    row += A(i, j);
            prod *= row;
        }
        int bits = __builtin_popcount(mask);
        total += ((n - bits) % 2 ? -1.0 : 1.0) * prod;
    }
    return total;
}

Matrix random_complex(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A(i, j) = Complex(u(gen), u(gen));
    return A;
}

struct LinFit {
    double slope, intercept, r2;
};

LinFit fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double intercept = (sy - slope * sx) / n;
    double r2num = (n * sxy - sx * sy);
    double r2 = r2num * r2num / ((n * sxx - sx * sx) * (n * syy - sy * sy));
    return {slope, intercept, r2};
}

} // namespace

TEST_CASE("permanent: closed cases and Ryser oracle") {
    CHECK(permanent(Matrix::Identity(3, 3)) == Complex(1.0, 0.0));
    Matrix m2(2, 2);
    m2 << 1.0, 2.0, 3.0, 4.0;
    CHECK(permanent(m2) == Complex(10.0, 0.0));

    Matrix r4 = random_complex(4, 11);
    CHECK(std::abs(permanent(r4) - ryser(r4)) < 1e-12);

    // symmetric under simultaneous row/column permutation
    Eigen::PermutationMatrix<4> perm;
    perm.setIdentity();
    perm.indices() << 2, 0, 3, 1;
    Matrix shuffled = perm * r4 * perm.transpose();
    CHECK(std::abs(permanent(shuffled) - permanent(r4)) < 1e-12);

    // multilinear in rows
    Matrix a = random_complex(3, 5), b = a, c = a;
    b.row(1) = random_complex(3, 6).row(1);
    c.row(1) = 2.0 * a.row(1) + 0.5 * b.row(1);
    CHECK(std::abs(permanent(c) - (2.0 * permanent(a) + 0.5 * permanent(b))) <
          1e-12);

    CHECK_THROWS_AS(permanent(Matrix::Identity(5, 5)), TooLarge);
}

TEST_CASE("quasimode basics") {
    const double h = 0.1;
    Matrix P = default_matrix(h);
    auto ref = reference_quasimode(P, {0.0, 0.25});

    SUBCASE("exact eigenvalue gives t0 ~ 0") {
        // z = 0 is in the unperturbed spectrum {h k}
        auto q = quasimode(P, {0.0, 0.0}, ref.e0, ref.f0);
        CHECK(q.t0 < 1e-12 * P.norm());
    }
    SUBCASE("gauge contract: phase of the backend is irrelevant") {
        auto q = quasimode(P, {0.0, 0.3}, ref.e0, ref.f0);
        // simulate a backend that returned a rotated singular vector
        QuasimodePair q2 = q;
        q2.e0 *= std::polar(1.0, 2.1);
        q2.f0 *= std::polar(1.0, -0.7);
        // re-fix against the same references
        auto refix = [&](Vector v, const Vector& r) {
            Complex ip = r.dot(v); // (v|r) in the paper convention
            v *= std::conj(ip) / std::abs(ip);
            return v;
        };
        CHECK((refix(q2.e0, ref.e0) - q.e0).norm() < 1e-9);
        CHECK((refix(q2.f0, ref.f0) - q.f0).norm() < 1e-9);
    }
    SUBCASE("ln t0 decreases affinely in 1/h at z = 0.3i") {
        std::vector<double> invh, lnt;
        for (double hh : {0.2, 0.1, 0.05}) {
            Matrix Ph = default_matrix(hh);
            auto r = reference_quasimode(Ph, {0.0, 0.3});
            auto q = quasimode(Ph, {0.0, 0.3}, r.e0, r.f0);
            invh.push_back(1.0 / hh);
            lnt.push_back(std::log(q.t0));
        }
        auto f = fit(invh, lnt);
        CHECK(f.slope < -0.7); // desk-scale form of -S(0.3) ~ -1.148
        CHECK(f.slope > -1.6);
        CHECK(f.r2 > 0.99);
    }
}

TEST_CASE("X vector: normalization and inner products") {
    const double h = 0.1;
    Matrix P = default_matrix(h);
    auto ref = reference_quasimode(P, {0.0, 0.2});
    auto qz = quasimode(P, {-0.1, 0.2}, ref.e0, ref.f0);
    auto qw = quasimode(P, {0.1, 0.2}, ref.e0, ref.f0);

    CHECK(std::abs(rank_inner(x_vector(qz), x_vector(qz)) - 1.0) < 1e-10);
    CHECK(std::abs(x_inner(qz, qz) - 1.0) < 1e-12);

    Complex zw = x_inner(qz, qw);
    CHECK(std::abs(zw) <= 1.0 + 1e-10);
    CHECK(std::abs(zw) < 1.0); // distinct points: strict
    CHECK(std::abs(zw - std::conj(x_inner(qw, qz))) < 1e-12);

    // factored inner product equals the rank-sum route
    CHECK(std::abs(zw - rank_inner(x_vector(qz), x_vector(qw))) < 1e-12);

    Matrix P2 = default_matrix(0.05);
    auto ref2 = reference_quasimode(P2, {0.0, 0.2});
    auto other = quasimode(P2, {0.1, 0.2}, ref2.e0, ref2.f0);
    CHECK_THROWS_AS(x_inner(qz, other), MixedRun);
}

TEST_CASE("overlap decay: -ln|x_inner| is affine in the K predictor") {
    const double h = 0.1;
    Matrix P = default_matrix(h);
    auto g = default_symbol();
    std::vector<double> kpred, mlog;
    for (double t0 : {0.0, 0.15, 0.3}) {
        auto ref = reference_quasimode(P, {0.0, t0});
        for (double r = 0.3 * std::sqrt(h); r <= 2.2 * std::sqrt(h);
             r += 0.4 * std::sqrt(h)) {
            auto qz = quasimode(P, {-r / 2, t0}, ref.e0, ref.f0);
            auto qw = quasimode(P, {r / 2, t0}, ref.e0, ref.f0);
            double sig = sigma_density(g, {0.0, t0});
            kpred.push_back(sig * r * r / (4 * h));
            mlog.push_back(-std::log(std::abs(x_inner(qz, qw))));
        }
    }
    auto f = fit(kpred, mlog);
    CHECK(f.r2 > 0.99);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("x_derivative") {
    SUBCASE("constant singular vector differentiates to zero") {
        Matrix D = Matrix::Zero(3, 3);
        D(0, 0) = 3.0;
        D(1, 1) = 1.0;
        D(2, 2) = 2.0;
        Vector ref_e = Vector::Unit(3, 1), ref_f = Vector::Unit(3, 1);
        auto d = x_derivative(D, {0.05, 0.0}, 1e-3, ref_e, ref_f);
        CHECK(d.dz_e0.norm() < 1e-10);
        CHECK(d.dzbar_f0.norm() < 1e-10);
    }
    const double h = 0.1;
    Matrix P = default_matrix(h);
    auto ref = reference_quasimode(P, {0.0, 0.3});

    SUBCASE("Richardson self-consistency") {
        auto raw = [&](double s) {
            return detail::x_derivative_once(P, {0.0, 0.3}, s, ref.e0, ref.f0);
        };
        auto d1 = raw(1e-2), d2 = raw(5e-3), d3 = raw(2.5e-3);
        Vector r1 = (4.0 * d2.dz_e0 - d1.dz_e0) / 3.0;
        Vector r2 = (4.0 * d3.dz_e0 - d2.dz_e0) / 3.0;
        CHECK((r1 - r2).norm() / r2.norm() < 1e-6);
    }
    SUBCASE("unit norm is stationary: Re(e0 | d e0) ~ 0") {
        const double s = 1e-3;
        auto qp = quasimode(P, {s, 0.3}, ref.e0, ref.f0);
        auto qm = quasimode(P, {-s, 0.3}, ref.e0, ref.f0);
        auto q0 = quasimode(P, {0.0, 0.3}, ref.e0, ref.f0);
        Vector de = (qp.e0 - qm.e0) / (2 * s);
        CHECK(std::abs(inner(de, q0.e0).real()) < 1e-6);
    }
    SUBCASE("StepTooCoarse on a step comparable to the quasimode scale") {
        CHECK_THROWS_AS(
            x_derivative(P, {0.0, 0.3}, 1.0, ref.e0, ref.f0), StepTooCoarse);
    }
}

TEST_CASE("gramian bundle") {
    const double h = 0.1;
    Matrix P = default_matrix(h);
    auto ref = reference_quasimode(P, {0.0, 0.2});
    const Complex z(-0.15, 0.2), w(0.15, 0.2);
    auto b = gramian(P, z, w, h, 1e-3, ref.e0, ref.f0);

    SUBCASE("exact 2x2 Gram identity for det A") {
        double expect = 1.0 - std::norm(b.xx);
        CHECK(b.detA == doctest::Approx(expect).epsilon(1e-10));
        CHECK(b.detA >= 0.0);
        CHECK(b.detA <= 1.0);
    }
    SUBCASE("G Hermitian positive semidefinite, detG > 0, trGamma > 0") {
        CHECK((b.G - Eigen::Matrix4cd(b.G.adjoint())).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(b.G);
        for (int i = 0; i < 4; ++i)
            CHECK(es.eigenvalues()(i) > -1e-10);
        CHECK(b.detG > 0.0);
        CHECK(b.trGamma > 0.0);
        CHECK(b.trGamma <= 100.0 / h);
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(
            gramian(P, {0.0, 0.2}, {0.01, 0.2}, h, 1e-3, ref.e0, ref.f0),
            PairTooClose);
    }
    SUBCASE("det A approaches 1 - e^{-2K} as h decreases") {
        auto g = default_symbol();
        double prev_err = 1e9;
        for (double hh : {0.1, 0.05, 0.025}) {
            Matrix Ph = default_matrix(hh);
            auto r = reference_quasimode(Ph, {0.0, 0.2});
            double sep = std::sqrt(hh);
            auto bb = gramian(Ph, {-sep / 2, 0.2}, {sep / 2, 0.2}, hh, 1e-4,
                              r.e0, r.f0);
            double K = sigma_density(g, {0.0, 0.2}) * sep * sep / (4 * hh);
            double pred = 1.0 - std::exp(-2.0 * K);
            double err = std::abs(bb.detA / pred - 1.0);
            CHECK(err < prev_err);
            prev_err = err;
        }
        CHECK(prev_err < 0.05);
    }
}
