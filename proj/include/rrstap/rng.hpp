#pragma once

#include <cstdint>
#include <random>

#include "rrstap/linalg.hpp"

namespace rrstap {

/// Deterministic random source. The engine is the bit-exact mt19937_64 and
/// all distributions are generated here rather than via std:: distribution
/// objects, so identical seeds give identical streams on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// uniform in [0, 1), 53-bit resolution
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + int(engine_() % std::uint64_t(hi - lo + 1));
    }

    /// standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// circular complex Gaussian with E|z|^2 = variance
    cplx cnormal(double variance) {
        const double s = std::sqrt(variance / 2.0);
        return {s * normal(), s * normal()};
    }

    int sign() { return (engine_() & 1u) ? 1 : -1; }

    static constexpr double pi = 3.141592653589793238462643383279502884;

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Splitmix64 finalizer; decorrelates per-run streams derived from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Stream-splitting rule used across the project: the stream for substream
/// `index` of `master` is splitmix64(master ^ splitmix64(index + 1)).
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

}  // namespace rrstap
