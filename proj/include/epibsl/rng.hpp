#pragma once

#include <cstdint>
#include <limits>

namespace epibsl {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Derives an independent stream key from a parent seed and a tag (replicate index, arm, ...).
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag + kGolden));
}

/// Counter-based generator: output i is a pure function of (key, i), so any entry of a
/// stream can be regenerated without replaying the ones before it.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() { return at(counter_++); }
    constexpr result_type at(std::uint64_t i) const { return splitmix64(key_ + (i + 1) * kGolden); }

    /// Uniform double in [0, 1) from output i.
    constexpr double uniform_at(std::uint64_t i) const {
        return static_cast<double>(at(i) >> 11) * 0x1.0p-53;
    }
    double uniform() { return uniform_at(counter_++); }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace epibsl
