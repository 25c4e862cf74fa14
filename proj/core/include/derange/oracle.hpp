#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "derange/chain.hpp"
#include "derange/exact.hpp"

// Exhaustive small-n ground truth. Nothing here calls the closed forms of
// exact.hpp except where a check explicitly compares against them.
namespace derange::oracle {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxCycleTypeN = 14;
inline constexpr int kMaxDeltaN = 25;
inline constexpr int kMaxProportionN = 18;
inline constexpr int kMaxShiftN = 20;
inline constexpr int kMaxCompositionDpN = 1000;

struct WeightedCycleType {
    CycleType type;
    double probability = 0.0;
};

struct ExactCycleType {
    CycleType type;
    Rational probability;
};

/// Every cycle type of a derangement of n with its ESF(θ) probability
/// n!/(λ_n θ_(n)) ∏ (θ/j)^{c_j}/c_j!. The normaliser is the enumerated total
/// itself, so the weights sum to one by construction. 2 <= n <= 14.
std::vector<WeightedCycleType> enumerate_cycle_types(const ModelParams& params);

/// Same with exact rational arithmetic; θ must be exactly representable as a rational.
std::vector<ExactCycleType> enumerate_cycle_types_exact(int n, const Rational& theta);

/// λ_n(θ) = Σ over cycle types of n!/θ_(n) ∏ (θ/j)^{c_j}/c_j!, exactly.
Rational lambda_exact(int n, const Rational& theta);

/// All members of Δ_n (compositions of n into parts >= 2), 2 <= n <= 25,
/// in lexicographic order of their composition.
std::vector<EtaSequence> enumerate_delta(int n);

/// P(ξ_n = r_n, …, ξ_2 = r_2) under the Feller coupling, ξ_1 = 1.
long double xi_probability(const EtaSequence& r, double theta);

/// Exact law of η for one (n, θ): ξ-product over Δ_n divided by its enumerated total.
class EtaLaw {
public:
    EtaLaw(int n, double theta);

    int n() const { return n_; }
    double theta() const { return theta_; }
    /// Σ_{r ∈ Δ_n} P(ξ = r), i.e. λ_n(θ) obtained by enumeration.
    long double normaliser() const { return normaliser_; }
    const std::vector<EtaSequence>& support() const { return support_; }
    std::span<const long double> probabilities() const { return probs_; }

    /// Throws std::invalid_argument if eta is not in Δ_n.
    long double pmf(const EtaSequence& eta) const;

private:
    int n_;
    double theta_;
    long double normaliser_ = 0;
    std::vector<EtaSequence> support_;
    std::vector<long double> probs_;
};

/// P(η = eta) = λ_n(θ)^{-1} P(ξ = eta) for eta ∈ Δ_n.
double exact_eta_pmf(const EtaSequence& eta, double theta);

/// Product of the chain's transition probabilities along eta's path.
double chain_path_probability(const EtaSequence& eta, double theta);

struct ShiftResult {
    EtaSequence source;
    EtaSequence target;
    int position = 0;
    /// False when S_i acts as the identity.
    bool moved = false;
};

/// S_i: move the 1 at position i down to i-1 when r_i = 1 and r_{i-2} = 0.
/// Requires 4 <= i <= n-1; throws std::out_of_range otherwise.
ShiftResult shift(const EtaSequence& eta, int i);

/// Outcome of one exhaustive check.
struct CheckReport {
    std::string name;
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
    double max_error = 0.0;
    std::string first_violation;

    bool ok() const { return violations == 0; }
    /// Records a comparison; `error` is the measured discrepancy, `tolerance` its bound.
    void record(bool pass, double error, const std::string& what);
    void merge(const CheckReport& other);
};

/// Every r ∈ Δ_n and applicable i: P(η = S_i r)/P(η = r) = (i-1)/(i-2). n <= 20.
CheckReport verify_shift_ratio(int n, double theta);

/// Every pair r, r' with |r| = |r'|: P(η=r)/P(η=r') = ∏_{j<b} (σ_j(r')-1)/(σ_j(r)-1),
/// and the ratio is identical for each θ given. n <= 18.
CheckReport verify_ratio_proposition(int n, std::span<const double> thetas);

struct ParityProbabilities {
    double all_odd = 0.0;   // α_n
    double all_even = 0.0;  // β_n
};

/// By enumeration of Δ_n for n <= 25, otherwise by the composition DP.
ParityProbabilities parity_probabilities(const ModelParams& params);
ParityProbabilities parity_probabilities_dp(const ModelParams& params);

struct MonotoneProbabilities {
    double decreasing = 0.0;  // P(η ∈ Λ_2(n))
    double increasing = 0.0;  // P(η ∈ Λ_1(n))
};

/// By enumeration of Δ_n for n <= 25, otherwise by the composition DP.
MonotoneProbabilities monotone_probabilities(const ModelParams& params);
MonotoneProbabilities monotone_probabilities_dp(const ModelParams& params);

/// λ_n(θ) as the total ξ-weight of all compositions, by the composition DP.
double composition_normaliser(const ModelParams& params);

/// P(Σ_{j=2}^n j Z_j = n) for independent Z_j ~ Poisson(x^j θ/j), by direct
/// convolution of the truncated laws. n <= 1000.
double poisson_acceptance_dp(const ModelParams& params, double x);

struct VerifyOptions {
    int max_n = 14;
    std::vector<double> thetas{0.5, 1.0, 2.0, 5.0};
};

/// The full exhaustive suite: exact formulas against enumeration, both η-law
/// routes, the shift and ratio identities, parity and monotonicity theorems.
std::vector<CheckReport> verify_all(const VerifyOptions& options);

}  // namespace derange::oracle
