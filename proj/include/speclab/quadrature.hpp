#pragma once

#include <cmath>
#include <cstddef>

#include "speclab/errors.hpp"

namespace speclab {

// Adaptive Gauss-Kronrod (G7/K15) on [a,b], absolute tolerance.
// Integrands here are smooth (finite Fourier series and their WKB
// exponentials), so plain bisection-on-error-estimate converges fast.
namespace detail {

// QUADPACK dqk15 abscissae/weights on [-1,1].
inline constexpr double kron_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kron_w[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double gauss_w[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
void gk15(const F& f, double a, double b, double& kronrod, double& err,
          double& resabs) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - half * kron_x[i]);
        fv[14 - i] = f(c + half * kron_x[i]);
    }
    fv[7] = f(c);
    double resk = kron_w[7] * fv[7];
    double resg = gauss_w[3] * fv[7];
    double resa = kron_w[7] * std::abs(fv[7]);
    for (int i = 0; i < 7; ++i) {
        resk += kron_w[i] * (fv[i] + fv[14 - i]);
        resa += kron_w[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) // odd Kronrod indices are the Gauss-7 nodes
            resg += gauss_w[i / 2] * (fv[i] + fv[14 - i]);
    }
    kronrod = resk * half;
    err = std::abs((resk - resg) * half);
    resabs = resa * std::abs(half);
}

template <class F>
double adapt(const F& f, double a, double b, double tol, int depth) {
    double val, err, resabs;
    gk15(f, a, b, val, err, resabs);
    // rounding floor: below ~50 eps * int |f| the error estimate is noise
    // and halving the tolerance further can never succeed
    if (err <= tol || err <= 1.2e-14 * resabs || depth >= 40)
        return val;
    const double c = 0.5 * (a + b);
    return adapt(f, a, c, 0.5 * tol, depth + 1) +
           adapt(f, c, b, 0.5 * tol, depth + 1);
}

} // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10) {
    if (a == b)
        return 0.0;
    return detail::adapt(f, a, b, abs_tol, 0);
}

} // namespace speclab
