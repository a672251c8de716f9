#pragma once

#include <cstdint>
#include <vector>

namespace ofl {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic pseudorandom stream (xoshiro256** seeded via splitmix64).
/// Self-contained so that identical seeds give identical streams across
/// platforms and standard libraries, which run reproducibility depends on.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = detail::splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// One draw per call, even for p = 0 or p >= 1.
    bool bernoulli(double p) {
        return next_double() < p;
    }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Fisher-Yates shuffle; uniform over permutations.
    template <class T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(xs[i - 1], xs[j]);
        }
    }

private:
    std::uint64_t state_[4];
};

/// Hash-combines a seed with a stream label; used to derive independent
/// per-trial streams as seed (+) trial-index without correlated state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t s = seed ^ (label + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
    return detail::splitmix64(s);
}

}  // namespace ofl
