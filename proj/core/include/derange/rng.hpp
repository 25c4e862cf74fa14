#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace derange {

/// Reproducible random stream identified by (seed, stream_id).
///
/// xoshiro256** seeded from `seed` through SplitMix64; stream k is advanced by
/// k jumps of 2^128 draws, so streams never overlap in practice. All derived
/// variates use integer arithmetic or exact bit conversions, so a given
/// (seed, stream_id) reproduces the same sequence on every platform.
/// Not thread-safe: one stream per worker.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next();
    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound), bound > 0 (Lemire's nearly-divisionless method).
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Poisson variate; sequential-search inversion below mean 10, PTRS above.
    std::uint64_t poisson(double mean);
    /// Sequential-search inversion with e^{-mean} supplied by the caller; mean < 10.
    std::uint64_t poisson_inversion(double mean, double exp_neg_mean);

    /// Advance by 2^128 draws.
    void jump();

private:
    std::uint64_t poisson_ptrs(double mean);

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace derange
