#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace nph {

// Deterministic random source used everywhere randomness appears (masks,
// sphere sampling, noise, random-feature projections). The generator is
// pinned down to the bit so a reimplementation in another language can
// replay any sequence from the seed:
//
//   seeding   SplitMix64(seed) produces the four 64-bit words of state.
//   stream    xoshiro256++ (Blackman/Vigna), output rotl(s0+s3,23)+s0.
//   double    u = (word >> 11) * 2^-53              in [0,1)
//             u = ((word >> 11) + 1) * 2^-53        in (0,1]
//   bounded   Lemire multiply-shift: high 64 bits of word * n.
//   gaussian  Box-Muller on (u1 in (0,1], u2 in [0,1)):
//             r = sqrt(-2 ln u1); z0 = r cos(2 pi u2); z1 = r sin(2 pi u2);
//             z1 is cached and returned by the next call.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& s : state_) s = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double next_double_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal deviate (Box-Muller, spare cached).
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Column vector of i.i.d. standard normal entries.
inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.next_gaussian();
    return v;
}

/// Stable seed derivation for independent sub-streams (cells, trials).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    SplitMix64 sm(base + 0x9e3779b97f4a7c15ull * (stream + 1));
    return sm.next();
}

}  // namespace nph
