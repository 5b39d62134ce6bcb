#pragma once

/// \file rng.hpp
/// Seeded random stream with derived substreams.
///
/// Engine is xoshiro256++ seeded through splitmix64. Distributions are
/// implemented here rather than taken from <random> because the standard
/// distributions are implementation-defined; this keeps every sampled value
/// a pure function of (seed, call sequence), which the reproducibility
/// contracts depend on.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace vpq {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= key * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = detail::splitmix64(s);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be nonzero.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be nonzero");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Independent stream derived from this stream's seed and a key.
    /// Pure function of (seed, key): unaffected by values already drawn.
    Rng substream(std::uint64_t key) const { return Rng(detail::mix_seed(seed_, key)); }

    /// Seed value for a derived stream, for APIs that take a seed.
    std::uint64_t substream_seed(std::uint64_t key) const { return detail::mix_seed(seed_, key); }

private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace vpq
