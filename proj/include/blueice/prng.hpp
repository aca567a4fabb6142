#pragma once

#include <cstdint>
#include <string_view>

namespace blueice {

/// SplitMix64 generator. The output sequence for a seed is part of the
/// cross-language contract, so the constants below must never change.
struct PrngState {
    std::uint64_t state = 0;

    friend bool operator==(const PrngState&, const PrngState&) = default;
};

constexpr std::uint64_t prng_next(PrngState& s) noexcept {
    s.state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s.state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
constexpr double prng_uniform(PrngState& s) noexcept {
    return static_cast<double>(prng_next(s) >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = kFnvOffsetBasis;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// Seed of the per-link stream for messages on `topic` from `src` to `dst`.
std::uint64_t derive_link_seed(std::uint64_t global_seed, std::string_view topic,
                               std::string_view src, std::string_view dst);

}  // namespace blueice
