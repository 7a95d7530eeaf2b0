#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace safebandit {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the k-th draw of round t in the stream of `seed` is
///   splitmix64(splitmix64(splitmix64(seed) + t) + k).
/// Draws never depend on call order, so a replication is reproducible from
/// (seed, t, k) alone on any platform.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t round, std::uint64_t k = 0) const noexcept {
        return splitmix64(splitmix64(key_ + round) + k);
    }

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform(std::uint64_t round, std::uint64_t k = 0) const noexcept {
        return static_cast<double>(bits(round, k) >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on draws k and k + 1.
    [[nodiscard]] double normal(std::uint64_t round, std::uint64_t k = 0) const noexcept {
        const double u1 = 1.0 - uniform(round, k);
        const double u2 = uniform(round, k + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t key_;
};

}  // namespace safebandit
