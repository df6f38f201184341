#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "speclab/errors.hpp"
#include "speclab/symbol.hpp"

namespace speclab {

struct DensityModel {
    double h = 0.0;
    double delta = 0.0;    // recorded for provenance; leading terms drop it
    double c_norm = 1.0;   // sigma convention inside K; 1 or 1/4

    void validate() const {
        if (h <= 0)
            throw ConfigInvalid("density model needs h > 0");
        if (c_norm != 1.0 && c_norm != 0.25)
            throw ConfigInvalid("c_norm must be 1 or 1/4");
    }
};

// d(z;h) = sigma(z) / (2 pi h), leading term only.
inline double one_point_density(const SymbolFunction& g, Complex z,
                                const DensityModel& m) {
    m.validate();
    return sigma_density(g, z) / (2.0 * std::numbers::pi * m.h);
}

namespace detail {

// Lambda / (1 - e^{-2K}) with the small-K cancellation handled by a series
// branch; the two branches agree to ~1e-13 relative at the switch point.
inline double lambda_over_gap(double K, double sz, double sw, double sm) {
    const double sm2 = sm * sm;
    if (K < 1e-3) {
        const double dsig = sz * sw - sm2;
        return dsig * (1.0 / (2.0 * K) + 0.5 + K / 6.0 - K * K * K / 90.0) +
               sm2 * (K - 2.0 * K * K * K / 9.0);
    }
    const double e2 = std::exp(-2.0 * K);
    const double f =
        (2.0 * K * K / std::tanh(K) - 4.0 * K) / (std::exp(K) * std::sinh(K));
    return (sz * sw + sm2 * e2 + sm2 * f) / (1.0 - e2);
}

} // namespace detail

// K(z,w;h) of the two-point law; same formula as k_weight but without the
// short-distance API guard (the density evaluator has its own regime logic).
inline double density_K(const SymbolFunction& g, Complex z, Complex w,
                        const DensityModel& m) {
    const double r = std::abs(z - w);
    return m.c_norm * sigma_density(g, 0.5 * (z + w)) * r * r / (4.0 * m.h);
}

// Two-point eigenvalue density D(z,w;h), all error factors set to 1.
inline double two_point_density(const SymbolFunction& g, Complex z, Complex w,
                                const DensityModel& m) {
    m.validate();
    if (z == w)
        throw PairCoincident("two-point density needs z != w");
    const double r = std::abs(z - w);
    if (r > 0.5 * g.band_width())
        throw PairTooFar("|z-w| outside the short-distance validity proxy");
    const double sz = sigma_density(g, z);
    const double sw = sigma_density(g, w);
    const double sm = sigma_density(g, 0.5 * (z + w));
    const double K = density_K(g, z, w, m);
    const double tph = 2.0 * std::numbers::pi * m.h;
    return detail::lambda_over_gap(K, sz, sw, sm) / (tph * tph);
}

// Reference asymptotics (leading order):
// short range: sigma_m^3 r^2 / ((4 pi h)^2 h); long range: d(z) d(w).
inline double short_range_density(const SymbolFunction& g, Complex z, Complex w,
                                  const DensityModel& m) {
    const double sm = sigma_density(g, 0.5 * (z + w));
    const double r = std::abs(z - w);
    const double fph = 4.0 * std::numbers::pi * m.h;
    return sm * sm * sm * r * r / (fph * fph * m.h);
}

inline double long_range_density(const SymbolFunction& g, Complex z, Complex w,
                                 const DensityModel& m) {
    return one_point_density(g, z, m) * one_point_density(g, w, m);
}

// D(z, w0) / d(w0): the density near a known eigenvalue at w0.
inline double conditional_density(const SymbolFunction& g, Complex z,
                                  Complex w0, const DensityModel& m) {
    double d0 = one_point_density(g, w0, m);
    if (d0 <= 0)
        throw OutOfBand("conditioning point has zero density");
    return two_point_density(g, z, w0, m) / d0;
}

// short-range reference for the conditional law: sigma_m^2 r^2 / (8 pi h^2)
inline double conditional_short_range(const SymbolFunction& g, Complex z,
                                      Complex w0, const DensityModel& m) {
    const double sm = sigma_density(g, 0.5 * (z + w0));
    const double r = std::abs(z - w0);
    return sm * sm * r * r / (8.0 * std::numbers::pi * m.h * m.h);
}

enum class Regime { short_range, crossover, long_range };

struct RegimeThresholds {
    double short_below;  // sqrt(h)
    double long_above;   // sqrt(h ln(1/h))
};

inline RegimeThresholds regime_thresholds(double h) {
    return {std::sqrt(h), std::sqrt(h * std::log(1.0 / h))};
}

inline Regime regime_classify(Complex z, Complex w, const DensityModel& m) {
    const double r = std::abs(z - w);
    RegimeThresholds t = regime_thresholds(m.h);
    if (r < t.short_below)
        return Regime::short_range;
    if (r > t.long_above)
        return Regime::long_range;
    return Regime::crossover;
}

} // namespace speclab
