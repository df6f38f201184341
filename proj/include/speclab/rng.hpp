#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace speclab {

// splitmix64 finalizer; used to derive per-trial seeds so that trial i's
// stream is independent of trial j's and of scheduling order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
    return splitmix64(splitmix64(master) + 0x9E3779B97F4A7C15ULL * (trial + 1));
}

// Deterministic complex-Gaussian source. std::normal_distribution is
// implementation-defined, so the transform is done by hand (polar method):
// byte-identical streams across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in (0, 1]
    double uniform_oc() {
        return (double((gen_() >> 11)) + 1.0) * 0x1p-53;
    }
    // uniform in [0, 1)
    double uniform_co() { return double(gen_() >> 11) * 0x1p-53; }

    // standard complex Gaussian, E|a|^2 = 1 (Re/Im independent N(0, 1/2))
    std::complex<double> cgauss() {
        double r = std::sqrt(-std::log(uniform_oc()));
        double th = 2.0 * std::numbers::pi * uniform_co();
        return {r * std::cos(th), r * std::sin(th)};
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace speclab
