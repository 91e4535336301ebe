#pragma once

#include <cmath>
#include <cstdint>

namespace unifl {

// Counter-based randomness built on the SplitMix64 mixer. Every random draw
// is a pure function of (seed, stream indices), so results are identical
// across platforms and parallel schedules. Stream splitting convention:
//   instance seed -> sample index -> vertex index
// via nested derive() calls.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent substream key.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t idx) {
    return mix64(key ^ (0x9e3779b97f4a7c15ULL * (idx + 1)));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::uint64_t key) {
    return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

// Stateful walker over one stream; next() is the SplitMix64 sequence.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double next_uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Box-Muller; consumes two uniforms per pair, caches the second.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        while (u1 <= 0.0) u1 = next_uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(6.283185307179586476925286766559 * u2);
        has_spare_ = true;
        return mag * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace unifl
