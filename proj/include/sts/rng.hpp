#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

namespace sts {

// Deterministic random number generation for the whole toolkit.
//
// Every draw below is defined in terms of exact 64-bit integer arithmetic
// plus IEEE-754 double operations, so a given seed produces the same stream
// on any conforming platform (libm-dependent draws, e.g. poisson, may differ
// across C libraries by at most an ulp-sensitive branch; within one build
// they are bit-stable). std::* distributions are deliberately not used:
// their output is implementation-defined.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent substream seed from a root seed and a domain tag
// (plus an optional per-item key, e.g. an image id). Streams with different
// tags never interact, so e.g. oracle noise cannot perturb sampling order.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view domain,
                                 std::string_view key = {}) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a 64
    for (unsigned char c : domain) h = (h ^ c) * 0x100000001B3ULL;
    h = (h ^ 0xFFULL) * 0x100000001B3ULL;     // domain/key separator
    for (unsigned char c : key) h = (h ^ c) * 0x100000001B3ULL;
    std::uint64_t state = root ^ h;
    splitmix64_next(state);
    return splitmix64_next(state);
}

// xoshiro256++ with splitmix64 seeding.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1), 53 bits of mantissa.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal pair via Box-Muller. Fixed consumption: two uniforms.
    std::pair<double, double> next_gaussian_pair() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    // Poisson draw. Knuth's product method on chunks of mean <= 30; chunking
    // is exact by superposition and keeps the product away from underflow.
    std::uint64_t next_poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        std::uint64_t total = 0;
        while (mean > 30.0) {
            total += poisson_knuth(30.0);
            mean -= 30.0;
        }
        return total + poisson_knuth(mean);
    }

    // Binomial draw as `trials` Bernoulli trials.
    std::uint64_t next_binomial(std::uint64_t trials, double p) {
        if (trials == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return trials;
        std::uint64_t count = 0;
        for (std::uint64_t i = 0; i < trials; ++i) {
            if (next_unit() < p) ++count;
        }
        return count;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t poisson_knuth(double lambda) {
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_unit();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t s_[4];
};

// In-place Fisher-Yates. partial_shuffle leaves a uniform without-replacement
// sample of size m in items[0..m); shuffle is the full permutation.
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t m, Rng& rng) {
    const std::size_t n = items.size();
    if (m > n) m = n;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        if (j != i) std::swap(items[i], items[j]);
    }
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    if (!items.empty()) partial_shuffle(items, items.size() - 1, rng);
}

}  // namespace sts
