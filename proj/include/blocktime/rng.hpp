#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace blocktime {

// 64-bit seed; same seed, same draw sequence, on every platform.
using Seed = std::uint64_t;

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Substream derivation rule: a child stream is seeded with
//   mix64(base + kGolden * (2*key + 1))
// so distinct keys under one base seed give distinct, decorrelated seeds.
// Nested derivation (campaign -> replication -> per-miner stream) chains
// this rule.
inline constexpr Seed derive_seed(Seed base, std::uint64_t key) {
    return detail::mix64(base + detail::kGolden * (2 * key + 1));
}

// xoshiro256++ (Blackman & Vigna 2019), seeded through splitmix64 so any
// 64-bit value, including 0, is a valid seed.
class Xoshiro256 {
  public:
    explicit Xoshiro256(Seed seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += detail::kGolden;
            word = detail::mix64(sm);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1); never returns 0 or 1, so it is
    // always safe under log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Inverse-CDF exponential draw with the given rate (per second).
    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

    // Independent child generator keyed off this stream's own seed.
    Xoshiro256 substream(std::uint64_t key) const {
        return Xoshiro256(derive_seed(seed_, key));
    }

    Seed seed() const { return seed_; }

  private:
    std::array<std::uint64_t, 4> state_{};
    Seed seed_;
};

}  // namespace blocktime
