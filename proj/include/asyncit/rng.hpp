#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace asyncit {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used for seeding and
/// for deriving child seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Child seed number `index` of `parent`: the (index + 1)-th output of a
/// SplitMix64 stream started at `parent`. A bijection in `index` for a
/// fixed parent, so distinct indices never collide.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return splitmix64_mix(parent + (index + 1) * kGoldenGamma);
}

/// xoshiro256** 1.0 (Blackman & Vigna), state filled from SplitMix64(seed).
/// Streams are portable: any implementation of the reference algorithm with
/// the same seeding reproduces them bit for bit.
class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    static constexpr std::string_view kAlgorithm = "xoshiro256**";
    static constexpr std::string_view kVersion = "1.0";
    static constexpr std::string_view kSeeding = "splitmix64";

    explicit constexpr Xoshiro256ss(std::uint64_t seed = 0) noexcept {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            x += kGoldenGamma;
            word = splitmix64_mix(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    constexpr double uniform01() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    constexpr double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    friend constexpr bool operator==(const Xoshiro256ss&, const Xoshiro256ss&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace asyncit
