#pragma once

#include <cstdint>

namespace pq {

/// splitmix64 (Steele, Lea, Flood 2014). The whole engine draws from this one
/// generator so transcripts replay bit-identically on any platform.
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Derived draws:
///   uniform(lo, hi)  span = hi - lo + 1; reject x >= 2^64 - (2^64 mod span);
///                    return lo + x mod span
///   unit()           (x >> 11) * 2^-53, in [0, 1)
///   bernoulli(p)     unit() < p
class SplitMix64 {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    constexpr explicit SplitMix64(std::uint64_t state = 0) noexcept : state_(state) {}

    constexpr std::uint64_t next() noexcept {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform integer in [lo, hi]; requires lo <= hi.
    constexpr std::int64_t uniform(std::int64_t lo, std::int64_t hi) noexcept {
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
        const std::uint64_t limit = 0 - ((0 - span) % span);      // 2^64 - (2^64 mod span), mod 2^64
        std::uint64_t x = next();
        while (limit != 0 && x >= limit) x = next();
        return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % span);
    }

    constexpr double unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr bool bernoulli(double p) noexcept { return unit() < p; }

    constexpr std::uint64_t state() const noexcept { return state_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    friend constexpr bool operator==(const SplitMix64&, const SplitMix64&) = default;

private:
    std::uint64_t state_;
};

/// Seed of the index-th independent stream under a master seed: equal to the
/// (index + 1)-th output of SplitMix64(master), but computable in O(1) so
/// parallel runners can hand out streams in any order.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return SplitMix64::mix(master + (index + 1) * SplitMix64::kGamma);
}

}  // namespace pq
