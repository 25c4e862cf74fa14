#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace derange {

using BigInt = boost::multiprecision::cpp_int;

/// Natural log of a positive big integer; -inf for zero.
double log_big(const BigInt& value);

/// Unsigned Stirling numbers of the first kind [n, k] for 0 <= k <= n <= n_max,
/// filled with [n, k] = [n-1, k-1] + (n-1)[n-1, k].
class StirlingTriangle {
public:
    explicit StirlingTriangle(int n_max);

    int n_max() const { return n_max_; }
    /// Zero outside 0 <= k <= n; throws std::out_of_range for n > n_max.
    const BigInt& operator()(int n, int k) const;

private:
    int n_max_;
    std::vector<std::vector<BigInt>> rows_;
};

/// [n, k], the number of permutations of n with exactly k cycles.
BigInt stirling_first_unsigned(int n, int k);

/// Number D(n, k) of derangements of n with exactly k cycles,
/// Σ_l (-1)^l C(n, l) [n-l, k-l]. Zero outside 1 <= k <= floor(n/2).
BigInt derangement_cycle_count(int n, int k);

/// D(n, 0) … D(n, floor(n/2)) from one Stirling triangle.
std::vector<BigInt> derangement_cycle_counts(int n);

/// Derangement number D_n = (n-1)(D_{n-1} + D_{n-2}), D_0 = 1, D_1 = 0.
BigInt derangement_number(int n);

BigInt binomial(int n, int k);

}  // namespace derange
