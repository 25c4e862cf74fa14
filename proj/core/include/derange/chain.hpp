#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "derange/exact.hpp"
#include "derange/rng.hpp"

namespace derange {

/// The {0,1} string η_n … η_1 of the derangement chain, with the implicit
/// boundary η_{n+1} = 1. Cycle lengths are the gaps between consecutive 1s
/// of 1 η_n … η_1.
class EtaSequence {
public:
    EtaSequence() = default;
    /// `bits` lists η_n first and η_1 last. No admissibility check.
    EtaSequence(int n, std::vector<std::uint8_t> bits);

    /// Places 1s so that the gaps read downward from the boundary are `lengths`.
    static EtaSequence from_lengths(std::span<const int> lengths);
    /// Parses "1 η_n … η_1" written without separators, e.g. "10011" for n = 4.
    static EtaSequence parse(std::string_view with_boundary);

    int n() const { return n_; }
    /// η_i for 1 <= i <= n+1.
    int at(int i) const;
    std::span<const std::uint8_t> bits() const { return bits_; }

    /// Membership in Δ_n: η_1 = 1, η_n = 0, no two adjacent 1s in 1 η_n … η_1.
    bool admissible() const;
    /// |r|, the number of 1s among η_n … η_1.
    int ones() const;
    /// σ_1 > σ_2 > … > σ_|r| = 1, the positions of the 1s below the boundary.
    std::vector<int> one_positions() const;
    /// Mirror image about the centre of 1 η_n … η_1; an involution on Δ_n.
    EtaSequence reversed() const;
    /// "1" followed by η_n … η_1.
    std::string to_string() const;

    void set(int i, int value);

    friend auto operator<=>(const EtaSequence&, const EtaSequence&) = default;

private:
    int n_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Cycle lengths A_1, A_2, … in the order the chain produces them.
struct OrderedCycleLengths {
    std::vector<int> values;

    std::size_t size() const { return values.size(); }
    int total() const;
    /// Every length >= 2 and the total equals n.
    bool valid(int n) const;
    int longest() const;
    bool weakly_decreasing() const;
    bool weakly_increasing() const;
    CycleType cycle_type(int n) const;

    friend auto operator<=>(const OrderedCycleLengths&, const OrderedCycleLengths&) = default;
};

/// Gaps between consecutive 1s of 1 η_n … η_1, first gap at the top boundary.
OrderedCycleLengths eta_to_lengths(const EtaSequence& eta);

/// Row of the chain's transition matrix for leaving state 0 at index r.
/// From state 1 the chain always moves to 0, so that row is not stored.
struct TransitionRow {
    double p_stay0 = 1.0;
    double p_emit1 = 0.0;
};

/// p_stay0 = (θ+r-1)λ_r / ((θ+r-1)λ_r + θλ_{r-1}), p_emit1 its complement.
/// Valid for 1 <= r <= table.n_max(); throws std::out_of_range otherwise.
TransitionRow transition_row(int r, const LambdaTable& table);

/// Precomputed emission probabilities for one (n, θ); immutable and shareable.
class EtaChain {
public:
    explicit EtaChain(const ModelParams& params);

    const ModelParams& params() const { return params_; }
    /// P(η_r = 1 | η_{r+1} = 0) for 3 <= r <= n-1; 0 elsewhere.
    double emit_probability(int r) const;

    EtaSequence sample_eta(RngStream& rng) const;
    /// Same draws as sample_eta, written straight into cycle lengths.
    void sample_lengths(RngStream& rng, std::vector<int>& lengths) const;

private:
    ModelParams params_;
    std::vector<double> emit_;
    std::vector<std::uint64_t> threshold_;
};

EtaSequence sample_eta(const ModelParams& params, RngStream& rng);

/// Root c of θ(1 - e^{-c}) = c used to tilt the Poisson means, and the
/// asymptotic acceptance gain e^{u(c)} over the untilted scheme.
struct TiltSolution {
    double theta = 1.0;
    double c = 0.0;
    double u = 0.0;
    double speedup = 1.0;

    /// x = e^{-c/n}.
    double x(int n) const;
    double residual() const;
};

/// Nonzero root for θ != 1 (negative below 1, positive above); c = 0 at θ = 1.
TiltSolution solve_tilt(double theta);

/// ∫_0^1 (1 - e^{-cv})/v dv.
double entire_exponential_integral(double c);

/// Exact acceptance probability P(T_1n = n) of the conditioned-Poisson sampler
/// with tilt x: x^n exp(-θ Σ_{j=2}^n x^j/j) λ_n θ_(n)/n!.
double poisson_acceptance_probability(const ModelParams& params, double x);

/// Large-n acceptance e^{-γθ} e^{u(c)} / (n Γ(θ)); pass c = 0 for the untilted rate.
double poisson_acceptance_asymptotic(const ModelParams& params, double c);

/// A sampled derangement.
struct DerangementSample {
    CycleType cycle_type;
    OrderedCycleLengths ordered_lengths;
    /// One-line form π_1 … π_n with values 1 … n.
    std::optional<std::vector<int>> permutation;
};

struct SampleOutcome {
    DerangementSample sample;
    std::uint64_t attempts = 1;
};

enum class Method { chain, feller, poisson };

std::string_view method_name(Method m);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);

/// Thrown when a rejection sampler exhausts its draw budget.
class MaxAttemptsExceeded : public std::runtime_error {
public:
    MaxAttemptsExceeded(std::uint64_t attempts, std::uint64_t draws);
    std::uint64_t attempts() const { return attempts_; }
    std::uint64_t draws() const { return draws_; }

private:
    std::uint64_t attempts_;
    std::uint64_t draws_;
};

inline constexpr std::uint64_t kDefaultDrawBudget = 1'000'000'000;

/// Common interface of the three samplers. Instances carry scratch buffers and
/// a draw budget, so each worker owns its own.
class DerangementSampler {
public:
    virtual ~DerangementSampler() = default;

    const ModelParams& params() const { return params_; }
    virtual Method method() const = 0;

    /// Writes the ordered cycle lengths of one accepted sample and returns the
    /// number of attempts it took. Throws MaxAttemptsExceeded once the budget is spent.
    virtual std::uint64_t sample_lengths(RngStream& rng, std::vector<int>& lengths) = 0;

    SampleOutcome sample(RngStream& rng, bool with_permutation = false);

    /// Bernoulli/Poisson draws allowed between calls to reset_budget().
    void set_draw_budget(std::uint64_t draws) { budget_ = draws; }
    void reset_budget() { used_ = 0; }
    std::uint64_t draws_used() const { return used_; }

protected:
    explicit DerangementSampler(const ModelParams& params);
    void charge(std::uint64_t draws, std::uint64_t attempts);

    ModelParams params_;

private:
    std::uint64_t budget_ = kDefaultDrawBudget;
    std::uint64_t used_ = 0;
};

/// η chain: one uniform per free step, cost linear in n and independent of θ.
class ChainSampler final : public DerangementSampler {
public:
    explicit ChainSampler(const ModelParams& params);
    Method method() const override { return Method::chain; }
    std::uint64_t sample_lengths(RngStream& rng, std::vector<int>& lengths) override;
    const EtaChain& chain() const { return chain_; }

private:
    EtaChain chain_;
};

/// Feller coupling with rejection of any 1-spacing; acceptance rate λ_n(θ).
/// ξ_2, ξ_3, … are drawn upward so that most rejections happen within a few draws.
class FellerRejectionSampler final : public DerangementSampler {
public:
    explicit FellerRejectionSampler(const ModelParams& params);
    Method method() const override { return Method::feller; }
    std::uint64_t sample_lengths(RngStream& rng, std::vector<int>& lengths) override;

private:
    std::vector<double> one_prob_;  // P(ξ_i = 1) indexed by i
    std::vector<int> ones_;
};

/// Independent Poisson(x^j θ/j) counts conditioned on Σ j Z_j = n.
/// Each attempt costs O(Σ_j x^j θ/j) rather than O(n).
/// Accepted counts are put in size-biased order so the ordered lengths share
/// the chain's law.
class ConditionedPoissonSampler final : public DerangementSampler {
public:
    ConditionedPoissonSampler(const ModelParams& params, const TiltSolution& tilt);
    Method method() const override { return Method::poisson; }
    std::uint64_t sample_lengths(RngStream& rng, std::vector<int>& lengths) override;
    double x() const { return x_; }

private:
    double x_;
    double total_mean_ = 0.0;
    double exp_neg_total_ = 1.0;
    std::vector<double> alias_prob_;  // slot s stands for length s + 2
    std::vector<int> alias_;
    std::vector<int> pool_;
};

/// Untilted (x = 1) when `tilted` is false.
std::unique_ptr<DerangementSampler> make_sampler(Method method, const ModelParams& params,
                                                 bool tilted = true);

SampleOutcome sample_feller_rejection(const ModelParams& params, RngStream& rng);
SampleOutcome sample_conditioned_poisson(const ModelParams& params, const TiltSolution& tilt,
                                         RngStream& rng);

/// Fixed-point-free permutation with the given ordered cycles: the first cycle
/// starts at 1, each further element is uniform among unused values, and every
/// new cycle starts at the smallest unused value.
std::vector<int> realize_permutation(const OrderedCycleLengths& lengths, RngStream& rng);

/// Cycle lengths of a one-line permutation, each cycle listed from its smallest element.
std::vector<int> permutation_cycle_lengths(std::span<const int> perm);

}  // namespace derange
