// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace moop {

/// xoshiro256** seeded through splitmix64 (Blackman & Vigna, 2018).
///
/// Every random draw in the library goes through this generator and the
/// helpers below rather than <random> distributions, whose output is
/// implementation-defined. Identical seeds therefore give identical
/// streams on every platform.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept;

    std::uint64_t operator()() noexcept { return next(); }
    std::uint64_t next() noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, bound) without modulo bias. `bound` must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Uniform integer on [lo, hi] (inclusive).
    long long between(long long lo, long long hi) noexcept {
        return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Index drawn proportionally to nonnegative `weights`. Falls back to the
    /// last positive weight if rounding leaves the cumulative sum short.
    std::size_t categorical(std::span<const double> weights) noexcept;

    template <class It>
    void shuffle(It first, It last) noexcept {
        auto n = last - first;
        for (auto i = n - 1; i > 0; --i) {
            auto j = static_cast<decltype(i)>(below(static_cast<std::uint64_t>(i) + 1));
            using std::swap;
            swap(first[i], first[j]);
        }
    }

    /// Derives an independent stream, e.g. one per benchmark repetition.
    Rng split(std::uint64_t stream) const noexcept;

private:
    std::uint64_t s_[4]{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

} // namespace moop
