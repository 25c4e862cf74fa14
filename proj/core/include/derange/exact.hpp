#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace derange {

/// Size and bias of a θ-biased derangement model.
struct ModelParams {
    int n = 2;
    double theta = 1.0;

    /// Throws std::invalid_argument unless n >= min_n and theta is positive and finite.
    void validate(int min_n = 2) const;
};

/// Natural-log carrier for probabilities and combinatorial weights.
struct LogWeight {
    double value = 0.0;

    double exp() const { return std::exp(value); }
    friend LogWeight operator+(LogWeight a, LogWeight b) { return {a.value + b.value}; }
    friend LogWeight operator-(LogWeight a, LogWeight b) { return {a.value - b.value}; }
};

/// Probabilities λ_0(θ) … λ_N(θ) that an ESF(θ) permutation of size i has no
/// fixed point. Immutable once built; safe to share between threads.
///
/// Built with the forward recurrence
///   λ_i = (i-1)/(θ+i-1) · (λ_{i-1} + θ/(θ+i-2) · λ_{i-2}),  λ_0 = 1, λ_1 = 0,
/// which only adds positive terms.
class LambdaTable {
public:
    LambdaTable(double theta, int n_max);

    double theta() const { return theta_; }
    int n_max() const { return static_cast<int>(values_.size()) - 1; }

    /// Unchecked access.
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    /// Throws std::out_of_range outside 0..n_max.
    double at(int i) const;
    /// log λ_i; -inf for λ_1.
    double log_at(int i) const { return std::log(at(i)); }

    std::span<const double> values() const { return values_; }

private:
    double theta_;
    std::vector<double> values_;
};

inline LambdaTable lambda_table(double theta, int n_max) { return LambdaTable(theta, n_max); }

/// Alternating-sum evaluation of λ_n(θ), kept as an independent cross-check
/// of the recurrence.
struct AltSumResult {
    double value = 0.0;
    /// Largest |term| divided by |value|; infinite when the sum cancels to zero.
    double cancellation = 1.0;
    bool reliable = true;
};

/// Sums the inclusion-exclusion series term by term with sign tracking.
/// `reliable` is false when cancellation exceeds `cancellation_limit`.
AltSumResult lambda_altsum(double theta, int n, double cancellation_limit = 1e12);

/// ln θ_(n) = ln θ(θ+1)···(θ+n-1); ln θ_(0) = 0.
LogWeight rising_factorial_log(double theta, int n);

/// Cycle counts c_2 … c_n of a derangement. counts()[j] = c_j, index 0 and 1 stay zero.
class CycleType {
public:
    CycleType() = default;
    explicit CycleType(int n);

    /// Tally of a sequence of cycle lengths; throws if a length is < 2 or the total is not n.
    static CycleType from_lengths(int n, std::span<const int> lengths);

    int n() const { return n_; }
    int count(int j) const;
    void add_cycle(int length);
    /// Throws std::invalid_argument if no cycle of that length is present.
    void remove_cycle(int length);

    int num_cycles() const;
    /// Σ j·c_j.
    int total() const;
    bool valid() const;

    std::span<const int> counts() const { return counts_; }
    /// Cycle lengths in decreasing order.
    std::vector<int> lengths_descending() const;
    /// e.g. "(2,3)".
    std::string to_string() const;

    friend auto operator<=>(const CycleType&, const CycleType&) = default;

private:
    int n_ = 0;
    std::vector<int> counts_;
};

/// Orders r_j of a joint falling factorial moment, keyed by cycle length j ≥ 2.
using MomentOrders = std::map<int, int>;

/// E ∏_j C̃_j(n)^{[r_j]}; zero when Σ j·r_j exceeds n.
double factorial_moment(const ModelParams& params, const MomentOrders& orders);

/// E C̃_j(n) for 2 <= j <= n.
double mean_cycle_count(const ModelParams& params, int j);

/// P(C̃_j(n) = r) for 0 <= r <= floor(n/j), by inverting the factorial moments.
double cycle_count_pmf(const ModelParams& params, int j, int r);

/// Full law of C̃_j(n), indexed by r = 0 … floor(n/j).
std::vector<double> cycle_count_distribution(const ModelParams& params, int j);

/// P(K̃_n = k): θ^k D(n,k) / (λ_n(θ) θ_(n)), for 1 <= k <= floor(n/2).
double num_cycles_pmf(const ModelParams& params, int k);

/// Law of K̃_n indexed by k = 0 … floor(n/2) (entry 0 is always zero).
std::vector<double> num_cycles_distribution(const ModelParams& params);

/// E K̃_n as a sum of E C̃_j(n) over j.
double num_cycles_mean(const ModelParams& params);

/// P(C̃_n(n) = 1), the probability the derangement is a single n-cycle.
double single_cycle_prob(const ModelParams& params);

/// Γ(θ+1) (e/n)^θ, the large-n approximation of single_cycle_prob.
double single_cycle_asymptotic(const ModelParams& params);

/// P(A_1(n) > l) for the first cycle produced by the η chain, 0 <= l <= n.
double first_cycle_survival(const ModelParams& params, int l);

/// E A_1(n) = Σ_{l>=0} P(A_1(n) > l).
double first_cycle_mean(const ModelParams& params);

/// Limit as n → ∞ of the probability that all cycle lengths are distinct:
/// e^{-θ(γ-1)} / Γ(θ+2).
double distinct_lengths_limit(double theta);

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

}  // namespace derange
