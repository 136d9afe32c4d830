#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace harbench {

// SplitMix64. Every random draw in the project goes through this generator
// so that runs are reproducible bit-for-bit regardless of platform or
// standard library (std::shuffle and std::normal_distribution are
// implementation-defined sequences).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        // rejection sampling over the largest multiple of n
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller; two uniforms consumed per call.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Derives an independent sub-stream seed from (seed, tag, indices).
inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& tag,
                              std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
    Rng r(seed ^ fnv1a(tag));
    r.next_u64();
    std::uint64_t h = r.next_u64();
    h ^= a * 0x9e3779b97f4a7c15ull;
    h ^= b * 0xbf58476d1ce4e5b9ull + (h << 6);
    h ^= c * 0x94d049bb133111ebull + (h >> 3);
    Rng r2(h);
    return r2.next_u64();
}

}  // namespace harbench
