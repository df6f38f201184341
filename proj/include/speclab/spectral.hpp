#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/io.hpp"
#include "speclab/operator.hpp"

namespace speclab {

struct EigenSet {
    std::vector<Complex> values; // sorted lexicographically by (Re, Im)
    std::vector<double> residuals;
    double matrix_norm = 0.0; // Frobenius (upper bound for the 2-norm)
};

struct SingularTriplet {
    double t0 = 0.0; // s_min(P - z)
    double t1 = 0.0; // next singular value (gap diagnostic)
    Vector e0;       // right singular vector: (P - z) e0 = t0 f0
    Vector f0;       // left singular vector
    Complex z;
};

namespace detail {

inline void check_finite(const Matrix& A) {
    if (!A.allFinite())
        throw ConvergenceFailure("matrix has non-finite entries");
}

inline bool is_upper_triangular(const Matrix& A) {
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = j + 1; i < A.rows(); ++i)
            if (A(i, j) != 0.0)
                return false;
    return true;
}

inline std::string dump_failure(const Matrix& A) {
    static int counter = 0;
    std::string path = "speclab_failure_" + std::to_string(counter++) + ".bin";
    try {
        write_matrix_binary(A, path);
    } catch (const Error&) {
        path = "(dump failed)";
    }
    return path;
}

} // namespace detail

// All eigenvalues with residual certificates ||(A - lambda) v|| / ||v||
// (an upper bound for s_min(A - lambda)). Canonical (Re, Im) ordering for
// reproducible artifacts. Exactly triangular matrices short-circuit to the
// diagonal: their residual is exact (A - a_ii is triangular with a zero
// diagonal entry, hence exactly singular), and the QR iteration's backward
// error would otherwise smear the spectrum of highly non-normal inputs.
inline EigenSet eigenvalues(const Matrix& A, int dim_cap = 1200) {
    detail::check_finite(A);
    if (A.rows() != A.cols())
        throw ConvergenceFailure("matrix not square");
    if (A.rows() > dim_cap)
        throw DimensionCap("dim " + std::to_string(A.rows()) +
                           " exceeds cap " + std::to_string(dim_cap));
    EigenSet out;
    out.matrix_norm = A.norm();
    const int n = int(A.rows());
    out.values.resize(n);
    out.residuals.assign(n, 0.0);

    if (detail::is_upper_triangular(A)) {
        for (int i = 0; i < n; ++i)
            out.values[i] = A(i, i);
    } else {
        Eigen::ComplexEigenSolver<Matrix> es(A, /*computeEigenvectors=*/true);
        if (es.info() != Eigen::Success)
            throw ConvergenceFailure("eigensolver failed; matrix dumped to " +
                                     detail::dump_failure(A));
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            Complex u = es.eigenvalues()(a), v = es.eigenvalues()(b);
            if (u.real() != v.real())
                return u.real() < v.real();
            return u.imag() < v.imag();
        });
        for (int i = 0; i < n; ++i) {
            const int k = order[i];
            out.values[i] = es.eigenvalues()(k);
            Vector v = es.eigenvectors().col(k);
            out.residuals[i] = (A * v - out.values[i] * v).norm() / v.norm();
        }
        return out;
    }
    std::sort(out.values.begin(), out.values.end(), [](Complex u, Complex v) {
        if (u.real() != v.real())
            return u.real() < v.real();
        return u.imag() < v.imag();
    });
    return out;
}

// Full SVD of P - z. t0^2 is the bottom eigenvalue of Q(z) = (P-z)*(P-z),
// and (P - z) e0 = t0 f0 exactly in the SVD convention.
inline SingularTriplet smallest_singular_triplet(const Matrix& P, Complex z,
                                                 int dim_cap = 1200) {
    detail::check_finite(P);
    if (P.rows() > dim_cap)
        throw DimensionCap("dim exceeds cap");
    Matrix A = P;
    A.diagonal().array() -= z;
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw ConvergenceFailure("SVD failed; matrix dumped to " +
                                 detail::dump_failure(A));
    const auto& s = svd.singularValues();
    const int n = int(s.size());
    SingularTriplet t;
    t.z = z;
    t.t0 = s(n - 1);
    t.t1 = (n >= 2) ? s(n - 2) : s(n - 1);
    if (n >= 2 && t.t1 - t.t0 < 1e-12 * P.norm())
        throw DegenerateGap("singular gap t1 - t0 below 1e-12 * ||P||; "
                            "singular vectors unreliable");
    t.e0 = svd.matrixV().col(n - 1);
    t.f0 = svd.matrixU().col(n - 1);
    return t;
}

// 1/s_min(P - z) per grid point, capped at 1e300.
inline std::vector<double> resolvent_norm_grid(const Matrix& P,
                                               const std::vector<Complex>& grid) {
    detail::check_finite(P);
    std::vector<double> out;
    out.reserve(grid.size());
    for (Complex z : grid) {
        Matrix A = P;
        A.diagonal().array() -= z;
        Eigen::BDCSVD<Matrix> svd(A);
        if (svd.info() != Eigen::Success)
            throw ConvergenceFailure("SVD failed on resolvent grid");
        double s = svd.singularValues()(svd.singularValues().size() - 1);
        out.push_back(s > 1e-300 ? std::min(1.0 / s, 1e300) : 1e300);
    }
    return out;
}

} // namespace speclab
