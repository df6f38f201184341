#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/spectral.hpp"

namespace speclab {

// Inner-product convention throughout: (u|v) = sum_i u_i conj(v_i), i.e.
// linear in the FIRST slot. In Eigen that is v.dot(u).
inline Complex inner(const Vector& u, const Vector& v) { return v.dot(u); }

// cheap fingerprint so quasimodes from different matrices can't be mixed
inline std::uint64_t matrix_fingerprint(const Matrix& A) {
    std::uint64_t acc = splitmix64(std::uint64_t(A.rows()));
    auto mix = [&](double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        acc = splitmix64(acc ^ bits);
    };
    const Eigen::Index n = A.rows();
    for (Eigen::Index i = 0; i < n; i += std::max<Eigen::Index>(1, n / 7)) {
        mix(A(i, i).real());
        mix(A(i, n - 1 - i).imag());
    }
    mix(A.squaredNorm());
    return acc;
}

struct QuasimodePair {
    Complex z;
    double t0 = 0.0;
    Vector e0, f0; // gauge-fixed unit vectors
    std::uint64_t run_id = 0;
};

namespace detail {

// rotate v so (v|ref) is real positive; fall back to the largest entry if
// the reference is (numerically) orthogonal
inline void gauge_fix(Vector& v, const Vector& ref) {
    Complex ip = inner(v, ref);
    if (std::abs(ip) < 1e-8) {
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        ip = v(imax);
    }
    v *= std::conj(ip) / std::abs(ip);
}

} // namespace detail

// Right/left quasimodes at z from the smallest singular triplet of P - z,
// with phases pinned against frozen reference vectors.
inline QuasimodePair quasimode(const Matrix& P, Complex z, const Vector& ref_e,
                               const Vector& ref_f) {
    SingularTriplet t = smallest_singular_triplet(P, z);
    QuasimodePair q;
    q.z = z;
    q.t0 = t.t0;
    q.e0 = t.e0;
    q.f0 = t.f0;
    detail::gauge_fix(q.e0, ref_e);
    detail::gauge_fix(q.f0, ref_f);
    q.run_id = matrix_fingerprint(P);
    return q;
}

// un-gauged reference pair at a window-center z_ref (phase fixed internally
// against the largest component so the references themselves are stable)
inline QuasimodePair reference_quasimode(const Matrix& P, Complex z_ref) {
    SingularTriplet t = smallest_singular_triplet(P, z_ref);
    QuasimodePair q;
    q.z = z_ref;
    q.t0 = t.t0;
    q.e0 = t.e0;
    q.f0 = t.f0;
    detail::gauge_fix(q.e0, q.e0);
    detail::gauge_fix(q.f0, q.f0);
    q.run_id = matrix_fingerprint(P);
    return q;
}

// (X(z)|X(w)) for X_{j,k} = e0_hat(k) * conj(f0_hat(j)), computed factored:
// (X(z)|X(w)) = (e0(z)|e0(w)) * (f0(w)|f0(z)). Never flattens the block.
inline Complex x_inner(const QuasimodePair& a, const QuasimodePair& b) {
    if (a.run_id != b.run_id)
        throw MixedRun("quasimodes come from different matrices");
    return inner(a.e0, b.e0) * inner(b.f0, a.f0);
}

// X and its z-derivative as a sum of factored terms a (x) conj(b):
// entries T_{j,k} = sum_i a_i(k) conj(b_i(j)). Inner products reduce to
// (S|T) = sum_{i,l} (a_i|c_l)(d_l|b_i).
struct RankSum {
    std::vector<Vector> a, b;
    std::uint64_t run_id = 0;
};

inline Complex rank_inner(const RankSum& s, const RankSum& t) {
    if (s.run_id != t.run_id)
        throw MixedRun("factored vectors come from different matrices");
    Complex acc = 0.0;
    for (size_t i = 0; i < s.a.size(); ++i)
        for (size_t l = 0; l < t.a.size(); ++l)
            acc += inner(s.a[i], t.a[l]) * inner(t.b[l], s.b[i]);
    return acc;
}

inline RankSum x_vector(const QuasimodePair& q) {
    return {{q.e0}, {q.f0}, q.run_id};
}

struct XDerivative {
    QuasimodePair at;      // quasimode at the center point
    Vector dz_e0;          // d/dz e0 (Wirtinger)
    Vector dzbar_f0;       // d/dzbar f0
    double step = 0.0;
};

// dX/dz = (dz e0) (x) conj(f0) + e0 (x) conj(dzbar f0)
inline RankSum x_derivative_ranksum(const XDerivative& d) {
    return {{d.dz_e0, d.at.e0}, {d.at.f0, d.dzbar_f0}, d.at.run_id};
}

namespace detail {

inline XDerivative x_derivative_once(const Matrix& P, Complex z, double s,
                                     const Vector& ref_e, const Vector& ref_f) {
    QuasimodePair c = quasimode(P, z, ref_e, ref_f);
    QuasimodePair pr = quasimode(P, z + Complex(s, 0), ref_e, ref_f);
    QuasimodePair mr = quasimode(P, z - Complex(s, 0), ref_e, ref_f);
    QuasimodePair pi = quasimode(P, z + Complex(0, s), ref_e, ref_f);
    QuasimodePair mi = quasimode(P, z - Complex(0, s), ref_e, ref_f);
    Vector de_re = (pr.e0 - mr.e0) / (2 * s);
    Vector de_im = (pi.e0 - mi.e0) / (2 * s);
    Vector df_re = (pr.f0 - mr.f0) / (2 * s);
    Vector df_im = (pi.f0 - mi.f0) / (2 * s);
    XDerivative d;
    d.at = c;
    d.dz_e0 = 0.5 * (de_re - Complex(0, 1) * de_im);
    d.dzbar_f0 = 0.5 * (df_re + Complex(0, 1) * df_im);
    d.step = s;
    return d;
}

} // namespace detail

// Central differences in Re and Im combined into the Wirtinger derivative,
// with a mandatory step-halving self-check.
inline XDerivative x_derivative(const Matrix& P, Complex z, double step,
                                const Vector& ref_e, const Vector& ref_f,
                                double self_check_tol = 0.05) {
    XDerivative d1 = detail::x_derivative_once(P, z, step, ref_e, ref_f);
    XDerivative d2 = detail::x_derivative_once(P, z, 0.5 * step, ref_e, ref_f);
    double scale = d2.dz_e0.norm() + d2.dzbar_f0.norm() + 1e-30;
    double change = ((d1.dz_e0 - d2.dz_e0).norm() +
                     (d1.dzbar_f0 - d2.dzbar_f0).norm()) /
                    scale;
    if (change > self_check_tol)
        throw StepTooCoarse("halving the step changed d/dz by " +
                            std::to_string(100 * change) + "%");
    return d2;
}

// exact permanent, n <= 4
inline Complex permanent(const Matrix& M) {
    const int n = int(M.rows());
    if (n != M.cols() || n < 1 || n > 4)
        throw TooLarge("permanent supports square matrices up to 4x4");
    int perm[4] = {0, 1, 2, 3};
    Complex acc = 0.0;
    std::sort(perm, perm + n);
    do {
        Complex p = 1.0;
        for (int i = 0; i < n; ++i)
            p *= M(i, perm[i]);
        acc += p;
    } while (std::next_permutation(perm, perm + n));
    return acc;
}

struct GramianBundle {
    Eigen::Matrix2cd A, B, C, Gamma;
    Eigen::Matrix4cd G;
    double detA = 0.0, detG = 0.0, permGamma = 0.0, trGamma = 0.0;
    Complex xx;        // (X(z)|X(w))
    Complex z, w;
    double h = 0.0;
};

// Gram matrix of (X(z), X(w), dX(z), dX(w)) and the Schur complement
// Gamma = C - B* A^{-1} B.
inline GramianBundle gramian(const Matrix& P, Complex z, Complex w, double h,
                             double step, const Vector& ref_e,
                             const Vector& ref_f) {
    if (std::abs(z - w) < 0.5 * std::pow(h, 0.6))
        throw PairTooClose("|z-w| below the 0.5 h^{3/5} guard");
    XDerivative dz = x_derivative(P, z, step, ref_e, ref_f);
    XDerivative dw = x_derivative(P, w, step, ref_e, ref_f);
    RankSum v[4] = {x_vector(dz.at), x_vector(dw.at), x_derivative_ranksum(dz),
                    x_derivative_ranksum(dw)};
    GramianBundle b;
    b.z = z;
    b.w = w;
    b.h = h;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            b.G(i, j) = rank_inner(v[i], v[j]);
    // enforce exact Hermitian symmetry against rounding
    b.G = 0.5 * (b.G + Eigen::Matrix4cd(b.G.adjoint()));
    b.A = b.G.topLeftCorner<2, 2>();
    b.B = b.G.topRightCorner<2, 2>();
    b.C = b.G.bottomRightCorner<2, 2>();
    b.xx = b.A(0, 1);
    b.detA = b.A.determinant().real();
    b.detG = b.G.determinant().real();
    if (b.detA < 1e-12)
        throw SingularA("det A = " + std::to_string(b.detA) +
                        "; pair too coherent for the Schur complement");
    b.Gamma = b.C - b.B.adjoint() * b.A.inverse() * b.B;
    b.Gamma = 0.5 * (b.Gamma + Eigen::Matrix2cd(b.Gamma.adjoint()));
    b.trGamma = b.Gamma.trace().real();
    b.permGamma = permanent(b.Gamma).real();
    return b;
}

} // namespace speclab
