#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>

#include "speclab/errors.hpp"
#include "speclab/rng.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Fourier-Galerkin truncation to modes k in {-M, ..., M}.
// Modes are ordered DESCENDING (row i <-> mode M - i). For symbols with only
// positive Fourier modes this makes the unperturbed matrix upper triangular,
// so the eigensolver returns the diagonal exactly instead of scattering the
// spectrum with O(eps)*norm backward error (this operator is extremely
// non-normal, so that scatter would be O(1)).
struct FourierTruncation {
    int M;

    int dim() const { return 2 * M + 1; }
    int mode_of(int i) const { return M - i; }
    int index_of(int k) const { return M - k; }

    static int block_radius(double h, double C1) {
        return int(std::floor(C1 / h));
    }
    // default rule: perturbation block + symbol convolution strictly interior
    static FourierTruncation for_params(const SymbolFunction& g, double h,
                                        double C1, int guard = 8) {
        return {block_radius(h, C1) + g.max_mode() + guard};
    }
    void validate(const SymbolFunction& g, double h, double C1) const {
        if (M < block_radius(h, C1) + g.max_mode())
            throw TruncationTooSmall(
                "M = " + std::to_string(M) + " < floor(C1/h) + M_g = " +
                std::to_string(block_radius(h, C1) + g.max_mode()));
    }
};

struct PerturbationDraw {
    Eigen::MatrixXcd alpha; // (2K+1)x(2K+1), row/col index j+K, k+K
    int K = 0;              // block radius floor(C1/h)
    std::uint64_t seed = 0;
    double norm = 0.0; // Hilbert-Schmidt norm of alpha
    bool accepted = false;
    int rejections = 0; // resamples consumed before this draw was accepted
};

struct PerturbedOperator {
    Matrix matrix;
    double h = 0.0;
    double delta = 0.0;
    std::uint64_t draw_seed = 0;
    FourierTruncation trunc{0};
};

// P0 = hD + g in the truncated Fourier basis: (P0)_{ij} = h k_i delta_{ij}
// + g_hat(k_i - k_j).
inline PerturbedOperator build_unperturbed(const SymbolFunction& g, double h,
                                           FourierTruncation trunc) {
    if (trunc.M < g.max_mode())
        throw TruncationTooSmall("truncation cannot hold the symbol's modes");
    const int n = trunc.dim();
    Matrix P = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int ki = trunc.mode_of(i);
        P(i, i) = h * double(ki);
        for (int j = 0; j < n; ++j) {
            const int m = ki - trunc.mode_of(j);
            if (m != 0 && std::abs(m) <= g.max_mode())
                P(i, j) += g.coeff(m);
        }
        P(i, i) += g.coeff(0);
    }
    return {std::move(P), h, 0.0, 0, trunc};
}

// Single draw of the Gaussian block, deterministic in the seed. Entries are
// laid down in fixed row-major order of (j, k), so the array is reproducible
// regardless of scheduling.
inline PerturbationDraw draw_perturbation(std::uint64_t seed, double h,
                                          double C1, double C_ball) {
    const int K = FourierTruncation::block_radius(h, C1);
    if (K < 1)
        throw ConfigInvalid("perturbation block radius floor(C1/h) < 1");
    PerturbationDraw d;
    d.K = K;
    d.seed = seed;
    const int n = 2 * K + 1;
    d.alpha.resize(n, n);
    Rng rng(seed);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            d.alpha(r, c) = rng.cgauss();
    d.norm = d.alpha.norm();
    d.accepted = (d.norm <= C_ball / h);
    return d;
}

// Resample-until-accepted policy (truncated Gaussian); rejections counted.
inline PerturbationDraw draw_accepted(std::uint64_t seed, double h, double C1,
                                      double C_ball, int max_tries = 64) {
    int rej = 0;
    std::uint64_t s = seed;
    for (int t = 0; t < max_tries; ++t) {
        PerturbationDraw d = draw_perturbation(s, h, C1, C_ball);
        if (d.accepted) {
            d.rejections = rej;
            return d;
        }
        ++rej;
        s = splitmix64(s ^ 0xD1B54A32D192ED03ULL);
    }
    throw RejectedDraw("ball restriction rejected " +
                       std::to_string(max_tries) +
                       " consecutive draws; C_ball is far too small");
}

struct DeltaValidation {
    double delta = 0.0;
    double eps0 = 0.0;
    double lower_barrier = 0.0; // sqrt(h) exp(-min_S / (C h)), must be < delta
    double upper_cap = 0.0;     // h^{5.1}, must be >= delta
    double min_action = 0.0;    // min of S over the window heights
    bool lower_ok = false;
    bool upper_ok = false;

    bool admissible() const { return lower_ok && upper_ok; }
};

// delta = sqrt(h) e^{-eps0/h} with eps0 = coeff * h ln(1/h), plus the two
// admissibility bounds evaluated numerically. At desk-scale h the window is
// usually empty; callers get flags, and only strict mode throws.
inline DeltaValidation delta_from_hypothesis(double h, double eps0_coeff,
                                             const SymbolFunction& g,
                                             const SpectralWindow& window,
                                             double C = 10.0,
                                             bool strict = false) {
    if (h <= 0 || h >= 1)
        throw ConfigInvalid("delta_from_hypothesis needs 0 < h < 1");
    DeltaValidation v;
    v.eps0 = eps0_coeff * h * std::log(1.0 / h);
    v.delta = std::sqrt(h) * std::exp(-v.eps0 / h);

    double min_s = std::numeric_limits<double>::infinity();
    const int n = 64;
    for (int i = 0; i <= n; ++i) {
        double t = window.im_lo + (window.im_hi - window.im_lo) * i / n;
        min_s = std::min(min_s, action_S(g, Complex(0.0, t)));
    }
    v.min_action = min_s;
    v.lower_barrier = std::sqrt(h) * std::exp(-min_s / (C * h));
    v.upper_cap = std::pow(h, 5.1);
    v.lower_ok = v.lower_barrier < v.delta;
    v.upper_ok = v.delta <= v.upper_cap;
    if (strict && !v.admissible())
        throw DeltaWindowEmpty(
            "no admissible delta at h = " + std::to_string(h) +
            ": lower barrier " + std::to_string(v.lower_barrier) +
            ", delta " + std::to_string(v.delta) + ", cap " +
            std::to_string(v.upper_cap));
    return v;
}

inline PerturbedOperator assemble_perturbed(const PerturbedOperator& P0,
                                            const PerturbationDraw& draw,
                                            double delta) {
    if (!draw.accepted)
        throw RejectedDraw("draw failed the ball restriction; resample first");
    if (draw.K > P0.trunc.M)
        throw TruncationTooSmall("perturbation block exceeds the truncation");
    PerturbedOperator P = P0;
    P.delta = delta;
    P.draw_seed = draw.seed;
    const int K = draw.K;
    for (int j = -K; j <= K; ++j)
        for (int k = -K; k <= K; ++k)
            P.matrix(P.trunc.index_of(j), P.trunc.index_of(k)) +=
                delta * draw.alpha(j + K, k + K);
    return P;
}

} // namespace speclab
