#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "rsf/error.hpp"

namespace rsf::nn {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of the `index`-th independent substream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/**
 * @brief Counter-based SplitMix64 generator.
 *
 * The state is a 64-bit counter advanced by the golden-ratio increment
 * 0x9E3779B97F4A7C15; each output is mix64(counter). All derived
 * distributions (uniform doubles, bounded integers, Gaussians) are
 * implemented here so a seed reproduces the same stream on every platform
 * and standard library.
 */
class Rng {
  public:
    static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;

    constexpr explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed), state_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }
    constexpr std::uint64_t counter() const noexcept { return state_; }

    constexpr std::uint64_t next_u64() noexcept {
        state_ += kIncrement;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw InvalidArgument("Rng::below: bound must be positive");
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one output per call, no cached pair).
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

    /// Independent generator for substream `index`; does not advance this one.
    Rng fork(std::uint64_t index) const noexcept { return Rng(derive_seed(seed_, index)); }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by Rng (std::shuffle is implementation-defined).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order, rng);
    return order;
}

}  // namespace rsf::nn
