#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace pap {

/// 64-bit seed. Identical seeds reproduce identical pipeline outputs
/// bit-for-bit on the same platform.
using Seed = std::uint64_t;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mixes extra words into a seed, for deriving independent sub-streams
/// (per image, per epoch, per fold...) from one root seed.
inline Seed hash_seed(Seed base) { return base; }

template <typename... Rest>
inline Seed hash_seed(Seed base, std::uint64_t next, Rest... rest) {
    std::uint64_t s = base ^ (next + 0x9e3779b97f4a7c15ULL + (base << 6) + (base >> 2));
    return hash_seed(splitmix64(s), static_cast<std::uint64_t>(rest)...);
}

/// Deterministic generator used everywhere randomness is needed.
/// Hand-rolled on purpose: std::<distribution> output is implementation
/// defined, which would break the reproducibility contract.
class Rng {
public:
    explicit Rng(Seed seed) : state_(seed) {
        // Warm up so nearby seeds decorrelate.
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n > 0.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (deterministic, pair-cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pap
