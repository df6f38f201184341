#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "speclab/errors.hpp"
#include "speclab/quadrature.hpp"

namespace speclab {

using Complex = std::complex<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Coefficient function g on the circle as a finite Fourier series.
// Hypothesis: Im g has exactly one minimum (at a) and one maximum (at b),
// checked on construction.
class SymbolFunction {
public:
    struct Mode {
        int m;
        Complex c;
    };

    static SymbolFunction from_modes(std::vector<Mode> modes) {
        SymbolFunction g;
        std::sort(modes.begin(), modes.end(),
                  [](const Mode& u, const Mode& v) { return u.m < v.m; });
        g.modes_ = std::move(modes);
        g.max_mode_ = 0;
        for (const auto& mo : g.modes_)
            g.max_mode_ = std::max(g.max_mode_, std::abs(mo.m));
        g.analyze();
        return g;
    }

    Complex eval(double x) const {
        Complex s = 0;
        for (const auto& mo : modes_)
            s += mo.c * std::polar(1.0, mo.m * x);
        return s;
    }
    Complex deriv(double x) const {
        Complex s = 0;
        for (const auto& mo : modes_)
            s += mo.c * Complex(0, mo.m) * std::polar(1.0, mo.m * x);
        return s;
    }
    double im(double x) const { return eval(x).imag(); }
    double im_deriv(double x) const { return deriv(x).imag(); }

    // Im of an antiderivative of g (integration constant 0 at the m=0 term).
    double im_antideriv(double x) const {
        Complex s = 0;
        for (const auto& mo : modes_) {
            if (mo.m == 0)
                s += mo.c * x;
            else
                s += mo.c * std::polar(1.0, mo.m * x) / Complex(0, mo.m);
        }
        return s.imag();
    }

    Complex coeff(int m) const {
        for (const auto& mo : modes_)
            if (mo.m == m)
                return mo.c;
        return 0.0;
    }

    Complex mean() const { return coeff(0); }
    int max_mode() const { return max_mode_; }
    double band_min() const { return band_min_; }
    double band_max() const { return band_max_; }
    double band_width() const { return band_max_ - band_min_; }
    // Location of the minimum of Im g, lifted so argmin() < argmax() < argmin() + 2pi
    // fails to hold; convention here: argmax() in [0, 2pi), argmin() in (argmax()-2pi, argmax()).
    double argmin_im() const { return x_min_; }
    double argmax_im() const { return x_max_; }

    bool in_band(double t) const { return t > band_min_ && t < band_max_; }

private:
    void analyze();

    std::vector<Mode> modes_;
    int max_mode_ = 0;
    double band_min_ = 0, band_max_ = 0;
    double x_min_ = 0, x_max_ = 0;
};

struct TurningPoints {
    double x_plus;  // Im g'(x_plus) < 0, in [0, 2pi)
    double x_minus; // Im g'(x_minus) > 0, lifted to (x_plus, x_plus + 2pi)
    double t;       // Im z
};

struct SpectralWindow {
    double re_lo, re_hi, im_lo, im_hi;
    double margin = 0.0;

    double area() const { return (re_hi - re_lo) * (im_hi - im_lo); }
    bool contains(Complex z) const {
        return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo &&
               z.imag() <= im_hi;
    }
    SpectralWindow dilated(double pad_re, double pad_im) const {
        return {re_lo - pad_re, re_hi + pad_re, im_lo - pad_im, im_hi + pad_im,
                margin};
    }
    // (H.2)-style interior check against the band of g.
    void validate(const SymbolFunction& g) const {
        if (re_lo > re_hi || im_lo > im_hi)
            throw ConfigInvalid("window is empty");
        if (margin <= 0.0)
            throw ConfigInvalid("window margin must be positive (H.2)");
        if (im_lo < g.band_min() + margin || im_hi > g.band_max() - margin)
            throw ConfigInvalid(
                "window violates (H.2): dist(Omega, boundary of Sigma) > 1/C "
                "fails for the configured margin");
    }
};

namespace detail {

inline double newton_root(const SymbolFunction& g, double t, double lo,
                          double hi) {
    // bisection bracket, then Newton polish on Im g(x) - t
    double flo = g.im(lo) - t;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = g.im(mid) - t;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        double f = g.im(x) - t;
        double df = g.im_deriv(x);
        if (df == 0.0)
            break;
        x -= f / df;
    }
    return x;
}

} // namespace detail

inline void SymbolFunction::analyze() {
    constexpr int n = 4096;
    // sign changes of Im g' on the grid; (H.1) demands exactly two
    int changes = 0;
    auto node = [&](int i) { return two_pi * (i + 0.5) / n; };
    double prev = im_deriv(node(0));
    std::vector<double> bracket_lo, bracket_hi;
    for (int i = 1; i <= n; ++i) {
        double cur = im_deriv(node(i));
        if ((cur < 0) != (prev < 0)) {
            ++changes;
            bracket_lo.push_back(node(i - 1));
            bracket_hi.push_back(node(i));
        }
        prev = cur;
    }
    if (changes != 2)
        throw MultiplicityViolation(
            "(H.1) violated: Im g' must have exactly two sign changes, found " +
            std::to_string(changes));

    // refine the two critical points of Im g (roots of Im g')
    double crit[2];
    for (int r = 0; r < 2; ++r) {
        double lo = bracket_lo[r], hi = bracket_hi[r];
        double flo = im_deriv(lo);
        for (int i = 0; i < 100; ++i) {
            double mid = 0.5 * (lo + hi);
            double fm = im_deriv(mid);
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        crit[r] = 0.5 * (lo + hi);
    }
    double v0 = im(crit[0]), v1 = im(crit[1]);
    if (v0 == v1)
        throw MultiplicityViolation("degenerate band: Im g is constant across "
                                    "its critical points");
    x_max_ = (v0 > v1) ? crit[0] : crit[1];
    x_min_ = (v0 > v1) ? crit[1] : crit[0];
    band_max_ = std::max(v0, v1);
    band_min_ = std::min(v0, v1);
    // lift: argmax in [0, 2pi), argmin in (argmax - 2pi, argmax)
    x_max_ = std::fmod(x_max_, two_pi);
    if (x_max_ < 0)
        x_max_ += two_pi;
    x_min_ = std::fmod(x_min_, two_pi);
    if (x_min_ < 0)
        x_min_ += two_pi;
    if (x_min_ >= x_max_)
        x_min_ -= two_pi;
}

// Default model symbol g(x) = e^{ix}.
inline SymbolFunction default_symbol() {
    return SymbolFunction::from_modes({{1, Complex(1.0, 0.0)}});
}

// --- operations -----------------------------------------------------------

inline TurningPoints find_turning_points(const SymbolFunction& g, double t) {
    if (!g.in_band(t))
        throw OutOfBand("Im z outside the open band (" +
                        std::to_string(g.band_min()) + ", " +
                        std::to_string(g.band_max()) + ")");
    constexpr int n = 4096;
    std::vector<double> roots;
    // half-step grid offset avoids landing exactly on roots (sin x at t = 0)
    auto node = [&](int i) { return two_pi * (i + 0.5) / n; };
    double prev = g.im(node(0)) - t;
    for (int i = 1; i <= n; ++i) {
        double cur = g.im(node(i)) - t;
        if ((cur < 0) != (prev < 0))
            roots.push_back(detail::newton_root(g, t, node(i - 1), node(i)));
        prev = cur;
    }
    if (roots.size() != 2)
        throw MultiplicityViolation("expected two turning points, found " +
                                    std::to_string(roots.size()));
    double xp, xm;
    if (g.im_deriv(roots[0]) < 0) {
        xp = roots[0];
        xm = roots[1];
    } else {
        xp = roots[1];
        xm = roots[0];
    }
    if (!(g.im_deriv(xp) < 0 && g.im_deriv(xm) > 0))
        throw MultiplicityViolation("turning point classification failed");
    // lift: x_plus in [0, 2pi), x_minus in (x_plus, x_plus + 2pi)
    xp = std::fmod(xp, two_pi);
    if (xp < 0)
        xp += two_pi;
    xm = std::fmod(xm, two_pi);
    if (xm < 0)
        xm += two_pi;
    if (xm <= xp)
        xm += two_pi;
    return {xp, xm, t};
}

// Lebesgue density of the pushforward of dxi^dx under p(x,xi) = xi + g(x);
// depends on Im z only.
inline double sigma_density(const SymbolFunction& g, Complex z) {
    TurningPoints tp = find_turning_points(g, z.imag());
    return 1.0 / g.im_deriv(tp.x_minus) - 1.0 / g.im_deriv(tp.x_plus);
}

// Im of the branch integral int_{x0}^{x1} (z - g(y)) dy, by quadrature.
inline double im_branch_integral(const SymbolFunction& g, Complex z, double x0,
                                 double x1, double tol = 1e-10) {
    return integrate(
        [&](double y) { return z.imag() - g.im(y); }, x0, x1, tol);
}

// Action between the two turning points: the smaller of the two branch
// integrals. Positive strictly inside the band.
inline double action_S(const SymbolFunction& g, Complex z) {
    TurningPoints tp = find_turning_points(g, z.imag());
    double b1 = im_branch_integral(g, z, tp.x_plus, tp.x_minus);
    double b2 = im_branch_integral(g, z, tp.x_plus, tp.x_minus - two_pi);
    return std::min(b1, b2);
}

// Leading quasimode-overlap exponent K = c_norm * sigma(mid) |z-w|^2 / (4h).
inline double k_weight(const SymbolFunction& g, Complex z, Complex w, double h,
                       double c_norm = 1.0) {
    const double r = std::abs(z - w);
    if (r > 0.25 * g.band_width())
        throw PairTooFar("|z-w| exceeds the short-distance regime proxy "
                         "(0.25 * band width)");
    if (r == 0.0)
        return 0.0;
    return c_norm * sigma_density(g, 0.5 * (z + w)) * r * r / (4.0 * h);
}

enum class Branch { plus, minus };

// Leading log-norm phase of the WKB quasimode:
//   plus:  Phi_1 = Im int_{x_+}^{x0} (z-g) + (h/4) ln(pi h / (-Im g'(x_+)))
//   minus: Phi_2 = -Im int_{x_-}^{x0} (z-g) + (h/4) ln(pi h / Im g'(x_-))
// The O(h^2) remainder is dropped.
inline double phi_leading(const SymbolFunction& g, Complex z, double h,
                          double x0, Branch branch) {
    TurningPoints tp = find_turning_points(g, z.imag());
    if (branch == Branch::plus) {
        double action = im_branch_integral(g, z, tp.x_plus, x0);
        return action +
               0.25 * h * std::log(std::numbers::pi * h / -g.im_deriv(tp.x_plus));
    }
    double action = -im_branch_integral(g, z, tp.x_minus, x0);
    return action +
           0.25 * h * std::log(std::numbers::pi * h / g.im_deriv(tp.x_minus));
}

namespace detail {

// C-infinity plateau cutoff: 1 on |u| <= u1, 0 for |u| >= 1.
inline double plateau(double u, double u1) {
    u = std::abs(u);
    if (u <= u1)
        return 1.0;
    if (u >= 1.0)
        return 0.0;
    double s = (u - u1) / (1.0 - u1);
    double e0 = std::exp(-1.0 / s);
    double e1 = std::exp(-1.0 / (1.0 - s));
    return e1 / (e0 + e1);
}

} // namespace detail

// ln of the squared L2 norm of the cut-off WKB quasimode, by quadrature:
//   plus:  ln int chi^2 exp(-2 Im psi_+ / h) dx,  psi_+ = int_{x0}^x (z-g)
//   minus: ln int chi^2 exp(+2 Im psi_- / h) dx
// The cutoff chi sits on the monotone branch of Im g containing the
// respective turning point. This is the quadrature route checked against
// 2*phi_leading/h.
inline double wkb_log_norm2(const SymbolFunction& g, Complex z, double h,
                            Branch branch, double quad_tol = 1e-12) {
    TurningPoints tp = find_turning_points(g, z.imag());
    const double a = g.argmin_im(); // in (b - 2pi, b)
    const double b = g.argmax_im();

    double xc, lo, hi;
    if (branch == Branch::plus) {
        // descending branch (b - 2pi, a)
        xc = tp.x_plus;
        while (xc >= a)
            xc -= two_pi;
        while (xc <= b - two_pi)
            xc += two_pi;
        lo = b - two_pi;
        hi = a;
    } else {
        // ascending branch (a, b)
        xc = tp.x_minus;
        while (xc >= b)
            xc -= two_pi;
        while (xc <= a)
            xc += two_pi;
        lo = a;
        hi = b;
    }
    const double wl = 0.95 * (xc - lo);
    const double wr = 0.95 * (hi - xc);
    const double sgn = (branch == Branch::plus) ? -1.0 : 1.0;
    const double t = z.imag();
    const double G0 = g.im_antideriv(xc);
    auto im_psi = [&](double x) {
        return t * (x - xc) - (g.im_antideriv(x) - G0);
    };
    auto f = [&](double x) {
        double u = (x < xc) ? (xc - x) / wl : (x - xc) / wr;
        double chi = detail::plateau(u, 0.75);
        if (chi == 0.0)
            return 0.0;
        return chi * chi * std::exp(2.0 * sgn * im_psi(x) / h);
    };
    double val = integrate(f, xc - wl, xc + wr, quad_tol);
    return std::log(val);
}

// Phase-space volume of p^{-1}(window): integral of sigma over the window.
// sigma depends on Im z only, so the Re direction integrates to the width.
inline double symplectic_volume(const SymbolFunction& g,
                                const SpectralWindow& w) {
    if (w.re_hi <= w.re_lo || w.im_hi <= w.im_lo)
        return 0.0;
    if (!g.in_band(w.im_lo) || !g.in_band(w.im_hi))
        throw OutOfBand("window leaves the open band");
    double im_int = integrate(
        [&](double t) { return sigma_density(g, Complex(0, t)); }, w.im_lo,
        w.im_hi, 1e-10);
    return (w.re_hi - w.re_lo) * im_int;
}

} // namespace speclab
