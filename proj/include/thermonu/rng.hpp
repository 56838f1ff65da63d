#pragma once

#include <cmath>
#include <cstdint>

namespace thermonu {

namespace detail {

// SplitMix64 output function (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Counter-based pseudo-random generator. The k-th output is a pure
/// function of (seed, k): out_k = mix64(seed + (k+1) * golden), which is
/// the SplitMix64 sequence. Streams derived from distinct (seed, index)
/// pairs are statistically independent, so parallel producers can each own
/// a stream without coordination.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    /// Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller; the second draw of each pair is cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u in (0, 1] keeps the log argument nonzero.
        const double u1 = 1.0 - next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double next_gaussian(double mean, double stddev) { return mean + stddev * next_gaussian(); }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives the seed of an independent sub-stream from a root seed and a
/// stream index (sample number, noise kind, ...). Deterministic.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return detail::mix64(seed + detail::kGolden * (index + 1));
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_stream(derive_stream(seed, a), b);
}

}  // namespace thermonu
