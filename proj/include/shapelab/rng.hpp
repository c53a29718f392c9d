#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "shapelab/common.hpp"

namespace shapelab {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Finalizer from splitmix64 (Steele, Lea, Flood; public domain reference code).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based pseudo-random stream: output n is a fixed 64-bit mix of
/// (key, n). State is a plain integer counter, so sequences are identical
/// on every platform and streams can be split or replayed by counter.
class counter_rng {
   public:
    explicit counter_rng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() {
        const std::uint64_t v = detail::mix64(key_ + counter_ * detail::kGolden);
        ++counter_;
        return v;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection step keeps the draw exactly uniform.
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    std::uint64_t counter() const { return counter_; }
    std::uint64_t key() const { return key_; }

   private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Deterministic stream derivation: mixes (master_seed, label, replica)
/// into a 64-bit stream key. Distinct labels or replica indices give
/// distinct keys except with negligible collision probability.
inline std::uint64_t derive_stream(std::uint64_t master_seed, std::string_view label,
                                   std::uint64_t replica) {
    std::uint64_t h = detail::mix64(master_seed ^ 0x5851F42D4C957F2DULL);
    for (unsigned char c : label) {
        h = detail::mix64((h + c) * detail::kGolden);
    }
    h = detail::mix64(h ^ detail::mix64(replica + detail::kGolden));
    return h;
}

/// Key for a per-edge stream identified by two vertex ids. Order-insensitive
/// inputs are not wanted here: callers pass the sorted pair.
inline std::uint64_t derive_edge_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = detail::mix64(seed ^ 0x94D049BB133111EBULL);
    h = detail::mix64(h + a * detail::kGolden);
    h = detail::mix64(h + b * detail::kGolden);
    return h;
}

/// Poisson sample with mean mu, exact conditional-product method.
/// Large means are split into chunks of mean <= 32 so the exp() factor
/// stays far from underflow; exp() is the one documented transcendental
/// in the sampling path.
inline std::uint64_t sample_poisson(counter_rng& rng, double mu) {
    if (!(mu >= 0.0)) throw error("sample_poisson: mean must be >= 0");
    std::uint64_t total = 0;
    while (mu > 0.0) {
        const double chunk = mu > 32.0 ? 32.0 : mu;
        mu -= chunk;
        const double threshold = std::exp(-chunk);
        double prod = rng.next_unit();
        while (prod >= threshold) {
            ++total;
            prod *= rng.next_unit();
        }
    }
    return total;
}

}  // namespace shapelab
