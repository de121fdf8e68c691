#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ldbp {

// SplitMix64. The constants below are part of the trace format's
// reproducibility contract: any port that uses the same increment and
// finalizer produces identical kernels for the same seed.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// next_double() takes the top 53 bits; bernoulli(p) is next_double() < p;
// uniform(n) is next_u64() % n.
class SplitMix64 {
public:
    static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kMul1 = 0xBF58476D1CE4E5B9ULL;
    static constexpr std::uint64_t kMul2 = 0x94D049BB133111EBULL;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kIncrement;
        return mix(state_);
    }

    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    std::uint64_t uniform(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    std::uint64_t state() const { return state_; }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * kMul1;
        z = (z ^ (z >> 27)) * kMul2;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Stateless hash used where a value must be a pure function of (seed, key).
constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t key) {
    return SplitMix64::mix(seed ^ SplitMix64::mix(key + SplitMix64::kIncrement));
}

inline void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " must be a probability in [0,1]");
}

} // namespace ldbp
