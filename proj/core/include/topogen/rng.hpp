#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace topogen {

// splitmix64 step. Used to derive independent stream seeds from a base
// seed plus small integer tags so seeds like 0 and 1 do not produce
// correlated streams.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    return mix64(mix64(base ^ 0x243f6a8885a308d3ull) + a * 0x9e3779b97f4a7c15ull + b);
}

// Deterministic random stream. mt19937_64 has a bit-exact specification,
// and the variate transforms below avoid std::*_distribution, whose
// output is implementation-defined. Reruns with one seed are therefore
// byte-identical across compilers.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    // Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; caches the second variate of each pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform index in [0,n) by rejection, so every index is exactly
    // equally likely.
    uint64_t index(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t x = gen_();
            if (x >= threshold) return x % n;
        }
    }

    uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace topogen
