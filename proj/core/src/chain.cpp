#include "derange/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace derange {

// ---------------------------------------------------------------------------
// EtaSequence

EtaSequence::EtaSequence(int n, std::vector<std::uint8_t> bits) : n_(n), bits_(std::move(bits)) {
    if (n < 1 || bits_.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("EtaSequence: need exactly n bits");
    for (auto b : bits_)
        if (b > 1)
            throw std::invalid_argument("EtaSequence: bits must be 0 or 1");
}

EtaSequence EtaSequence::from_lengths(std::span<const int> lengths) {
    int n = 0;
    for (int a : lengths) {
        if (a < 1)
            throw std::invalid_argument("EtaSequence::from_lengths: lengths must be positive");
        n += a;
    }
    if (n < 1)
        throw std::invalid_argument("EtaSequence::from_lengths: empty composition");
    EtaSequence eta(n, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
    int pos = n + 1;
    for (int a : lengths) {
        pos -= a;
        eta.set(pos, 1);
    }
    return eta;
}

EtaSequence EtaSequence::parse(std::string_view with_boundary) {
    if (with_boundary.size() < 2 || with_boundary.front() != '1')
        throw std::invalid_argument("EtaSequence::parse: expected leading boundary 1");
    std::vector<std::uint8_t> bits;
    for (char ch : with_boundary.substr(1)) {
        if (ch != '0' && ch != '1')
            throw std::invalid_argument("EtaSequence::parse: only 0 and 1 allowed");
        bits.push_back(ch == '1' ? 1 : 0);
    }
    const int n = static_cast<int>(bits.size());
    return EtaSequence(n, std::move(bits));
}

int EtaSequence::at(int i) const {
    if (i == n_ + 1)
        return 1;
    if (i < 1 || i > n_)
        throw std::out_of_range("EtaSequence::at: index outside 1..n+1");
    return bits_[static_cast<std::size_t>(n_ - i)];
}

void EtaSequence::set(int i, int value) {
    if (i < 1 || i > n_)
        throw std::out_of_range("EtaSequence::set: index outside 1..n");
    bits_[static_cast<std::size_t>(n_ - i)] = value ? 1 : 0;
}

bool EtaSequence::admissible() const {
    if (n_ < 2 || at(1) != 1 || at(n_) != 0)
        return false;
    for (int i = n_ + 1; i >= 2; --i)
        if (at(i) == 1 && at(i - 1) == 1)
            return false;
    return true;
}

int EtaSequence::ones() const {
    return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<int> EtaSequence::one_positions() const {
    std::vector<int> out;
    for (int i = n_; i >= 1; --i)
        if (at(i) == 1)
            out.push_back(i);
    return out;
}

EtaSequence EtaSequence::reversed() const {
    EtaSequence out(n_, std::vector<std::uint8_t>(bits_.size(), 0));
    for (int i = 1; i <= n_; ++i)
        out.set(i, at(n_ + 2 - i));
    return out;
}

std::string EtaSequence::to_string() const {
    std::string s = "1";
    for (auto b : bits_)
        s.push_back(b ? '1' : '0');
    return s;
}

// ---------------------------------------------------------------------------
// OrderedCycleLengths

int OrderedCycleLengths::total() const { return std::accumulate(values.begin(), values.end(), 0); }

bool OrderedCycleLengths::valid(int n) const {
    return !values.empty() && std::all_of(values.begin(), values.end(), [](int a) { return a >= 2; }) &&
           total() == n;
}

int OrderedCycleLengths::longest() const {
    return values.empty() ? 0 : *std::max_element(values.begin(), values.end());
}

bool OrderedCycleLengths::weakly_decreasing() const {
    return std::is_sorted(values.begin(), values.end(), std::greater<>());
}

bool OrderedCycleLengths::weakly_increasing() const {
    return std::is_sorted(values.begin(), values.end());
}

CycleType OrderedCycleLengths::cycle_type(int n) const { return CycleType::from_lengths(n, values); }

OrderedCycleLengths eta_to_lengths(const EtaSequence& eta) {
    OrderedCycleLengths out;
    int last = eta.n() + 1;
    for (int i = eta.n(); i >= 1; --i)
        if (eta.at(i) == 1) {
            out.values.push_back(last - i);
            last = i;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Transition matrices

TransitionRow transition_row(int r, const LambdaTable& table) {
    if (r < 1 || r > table.n_max())
        throw std::out_of_range("transition_row: r=" + std::to_string(r) + " outside 1.." +
                                std::to_string(table.n_max()));
    const double theta = table.theta();
    const double stay = (theta + r - 1) * table[r];
    const double emit = theta * table[r - 1];
    TransitionRow row;
    row.p_stay0 = stay / (stay + emit);
    row.p_emit1 = 1.0 - row.p_stay0;
    return row;
}

EtaChain::EtaChain(const ModelParams& params)
    : params_(params), emit_(static_cast<std::size_t>(std::max(params.n, 0)) + 1, 0.0) {
    params.validate();
    const LambdaTable table(params.theta, params.n);
    for (int r = 3; r <= params.n - 1; ++r)
        emit_[static_cast<std::size_t>(r)] = transition_row(r, table).p_emit1;
    // uniform01() < p exactly when its 53-bit mantissa is below ceil(p 2^53).
    threshold_.resize(emit_.size());
    for (std::size_t r = 0; r < emit_.size(); ++r)
        threshold_[r] = static_cast<std::uint64_t>(std::ceil(std::ldexp(emit_[r], 53)));
}

double EtaChain::emit_probability(int r) const {
    if (r < 3 || r > params_.n - 1)
        return 0.0;
    return emit_[static_cast<std::size_t>(r)];
}

EtaSequence EtaChain::sample_eta(RngStream& rng) const {
    const int n = params_.n;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n), 0);
    // bits[n - i] holds η_i; η_n = 0 is forced by the boundary η_{n+1} = 1.
    bool prev_one = false;
    for (int i = n - 1; i >= 3; --i) {
        if (prev_one) {
            prev_one = false;
            continue;
        }
        if (rng.uniform01() < emit_[static_cast<std::size_t>(i)]) {
            bits[static_cast<std::size_t>(n - i)] = 1;
            prev_one = true;
        }
    }
    bits[static_cast<std::size_t>(n - 1)] = 1;  // η_1
    return EtaSequence(n, std::move(bits));
}

void EtaChain::sample_lengths(RngStream& rng, std::vector<int>& lengths) const {
    const int n = params_.n;
    // Positions of the 1s first, written without branching on the draw.
    lengths.resize(static_cast<std::size_t>(n / 2 + 1));
    int* pos = lengths.data();
    const std::uint64_t* threshold = threshold_.data();
    std::size_t k = 0;
    for (int i = n - 1; i >= 3;) {
        const int one = (rng.next() >> 11) < threshold[i] ? 1 : 0;
        pos[k] = i;
        k += static_cast<std::size_t>(one);
        i -= 1 + one;
    }
    pos[k++] = 1;
    int above = n + 1;
    for (std::size_t j = 0; j < k; ++j) {
        const int p = pos[j];
        pos[j] = above - p;
        above = p;
    }
    lengths.resize(k);
}

EtaSequence sample_eta(const ModelParams& params, RngStream& rng) {
    return EtaChain(params).sample_eta(rng);
}

// ---------------------------------------------------------------------------
// Samplers

std::string_view method_name(Method m) {
    switch (m) {
    case Method::chain:
        return "chain";
    case Method::feller:
        return "feller";
    case Method::poisson:
        return "poisson";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "chain")
        return Method::chain;
    if (name == "feller")
        return Method::feller;
    if (name == "poisson")
        return Method::poisson;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

MaxAttemptsExceeded::MaxAttemptsExceeded(std::uint64_t attempts, std::uint64_t draws)
    : std::runtime_error("draw budget exhausted after " + std::to_string(attempts) +
                         " attempts (" + std::to_string(draws) + " draws)"),
      attempts_(attempts),
      draws_(draws) {}

DerangementSampler::DerangementSampler(const ModelParams& params) : params_(params) {
    params.validate();
}

void DerangementSampler::charge(std::uint64_t draws, std::uint64_t attempts) {
    used_ += draws;
    if (used_ > budget_)
        throw MaxAttemptsExceeded(attempts, used_);
}

SampleOutcome DerangementSampler::sample(RngStream& rng, bool with_permutation) {
    SampleOutcome out;
    out.attempts = sample_lengths(rng, out.sample.ordered_lengths.values);
    out.sample.cycle_type = out.sample.ordered_lengths.cycle_type(params_.n);
    if (with_permutation)
        out.sample.permutation = realize_permutation(out.sample.ordered_lengths, rng);
    return out;
}

ChainSampler::ChainSampler(const ModelParams& params)
    : DerangementSampler(params), chain_(params) {}

std::uint64_t ChainSampler::sample_lengths(RngStream& rng, std::vector<int>& lengths) {
    chain_.sample_lengths(rng, lengths);
    charge(static_cast<std::uint64_t>(std::max(params_.n - 3, 0)), 1);
    return 1;
}

FellerRejectionSampler::FellerRejectionSampler(const ModelParams& params)
    : DerangementSampler(params), one_prob_(static_cast<std::size_t>(params.n) + 1, 0.0) {
    one_prob_[1] = 1.0;
    for (int i = 2; i <= params.n; ++i)
        one_prob_[static_cast<std::size_t>(i)] = params.theta / (params.theta + i - 1);
    ones_.reserve(static_cast<std::size_t>(params.n));
}

std::uint64_t FellerRejectionSampler::sample_lengths(RngStream& rng, std::vector<int>& lengths) {
    const int n = params_.n;
    std::uint64_t attempts = 0;
    for (;;) {
        ++attempts;
        ones_.clear();
        ones_.push_back(1);  // ξ_1 = 1 surely
        int last_one = 1;
        bool rejected = false;
        std::uint64_t draws = 0;
        for (int i = 2; i <= n; ++i) {
            ++draws;
            if (rng.uniform01() < one_prob_[static_cast<std::size_t>(i)]) {
                if (last_one == i - 1) {
                    rejected = true;
                    break;
                }
                last_one = i;
                ones_.push_back(i);
            }
        }
        charge(draws, attempts);
        // A 1 at ξ_n would leave a 1-spacing against the boundary at n+1.
        if (!rejected && last_one != n)
            break;
    }
    lengths.clear();
    int prev = n + 1;
    for (auto it = ones_.rbegin(); it != ones_.rend(); ++it) {
        lengths.push_back(prev - *it);
        prev = *it;
    }
    return attempts;
}

ConditionedPoissonSampler::ConditionedPoissonSampler(const ModelParams& params,
                                                     const TiltSolution& tilt)
    : DerangementSampler(params), x_(tilt.x(params.n)) {
    if (std::abs(tilt.theta - params.theta) > 1e-12 * params.theta)
        throw std::invalid_argument("ConditionedPoissonSampler: tilt solved for a different theta");
    const int n = params.n;
    std::vector<double> means(static_cast<std::size_t>(n) - 1);
    double xj = x_;
    for (int j = 2; j <= n; ++j) {
        xj *= x_;
        means[static_cast<std::size_t>(j - 2)] = xj * params.theta / j;
        total_mean_ += means[static_cast<std::size_t>(j - 2)];
    }
    // Vose alias table over j = 2 … n with weights proportional to the means.
    const std::size_t k = means.size();
    alias_prob_.assign(k, 0.0);
    alias_.assign(k, 0);
    std::vector<double> scaled(k);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
        scaled[i] = means[i] * static_cast<double>(k) / total_mean_;
        (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
        const std::size_t s = small.back(), l = large.back();
        small.pop_back();
        alias_prob_[s] = scaled[s];
        alias_[s] = static_cast<int>(l);
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::size_t i : large)
        alias_prob_[i] = 1.0;
    for (std::size_t i : small)
        alias_prob_[i] = 1.0;
    exp_neg_total_ = std::exp(-total_mean_);
}

std::uint64_t ConditionedPoissonSampler::sample_lengths(RngStream& rng,
                                                        std::vector<int>& lengths) {
    // Z_2 … Z_n are drawn by splitting one Poisson(Σ means) count of events
    // across lengths in proportion to their means.
    const int n = params_.n;
    const auto k = static_cast<std::uint64_t>(alias_.size());
    std::uint64_t attempts = 0;
    for (;;) {
        ++attempts;
        pool_.clear();
        const std::uint64_t events = total_mean_ < 10.0
                                         ? rng.poisson_inversion(total_mean_, exp_neg_total_)
                                         : rng.poisson(total_mean_);
        long long total = 0;
        std::uint64_t e = 0;
        for (; e < events && total <= n; ++e) {
            const auto slot = static_cast<std::size_t>(rng.uniform_index(k));
            const int j = 2 + (rng.uniform01() < alias_prob_[slot] ? static_cast<int>(slot)
                                                                   : alias_[slot]);
            total += j;
            pool_.push_back(j);
        }
        charge(1 + e, attempts);
        if (total == n)
            break;
    }
    // Size-biased order: each next cycle is picked with probability proportional to its length.
    lengths.clear();
    std::uint64_t remaining = static_cast<std::uint64_t>(n);
    while (!pool_.empty()) {
        std::uint64_t ticket = rng.uniform_index(remaining);
        std::size_t idx = 0;
        while (ticket >= static_cast<std::uint64_t>(pool_[idx])) {
            ticket -= static_cast<std::uint64_t>(pool_[idx]);
            ++idx;
        }
        const int len = pool_[idx];
        lengths.push_back(len);
        remaining -= static_cast<std::uint64_t>(len);
        pool_[idx] = pool_.back();
        pool_.pop_back();
    }
    return attempts;
}

std::unique_ptr<DerangementSampler> make_sampler(Method method, const ModelParams& params,
                                                 bool tilted) {
    switch (method) {
    case Method::chain:
        return std::make_unique<ChainSampler>(params);
    case Method::feller:
        return std::make_unique<FellerRejectionSampler>(params);
    case Method::poisson: {
        TiltSolution tilt = tilted ? solve_tilt(params.theta) : TiltSolution{params.theta};
        return std::make_unique<ConditionedPoissonSampler>(params, tilt);
    }
    }
    throw std::invalid_argument("make_sampler: unknown method");
}

SampleOutcome sample_feller_rejection(const ModelParams& params, RngStream& rng) {
    FellerRejectionSampler sampler(params);
    return sampler.sample(rng);
}

SampleOutcome sample_conditioned_poisson(const ModelParams& params, const TiltSolution& tilt,
                                         RngStream& rng) {
    ConditionedPoissonSampler sampler(params, tilt);
    return sampler.sample(rng);
}

// ---------------------------------------------------------------------------
// Permutations

std::vector<int> realize_permutation(const OrderedCycleLengths& lengths, RngStream& rng) {
    const int n = lengths.total();
    if (n < 2 || !lengths.valid(n))
        throw std::invalid_argument("realize_permutation: invalid cycle lengths");

    // Unused values kept in an unordered pool with O(1) removal.
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::vector<int> where(static_cast<std::size_t>(n) + 1);
    std::iota(pool.begin(), pool.end(), 1);
    for (int v = 1; v <= n; ++v)
        where[static_cast<std::size_t>(v)] = v - 1;
    std::vector<bool> used(static_cast<std::size_t>(n) + 2, false);
    auto take = [&](int v) {
        const int slot = where[static_cast<std::size_t>(v)];
        const int last = pool.back();
        pool[static_cast<std::size_t>(slot)] = last;
        where[static_cast<std::size_t>(last)] = slot;
        pool.pop_back();
        used[static_cast<std::size_t>(v)] = true;
    };

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::vector<int> cycle;
    int smallest = 1;
    for (int len : lengths.values) {
        while (used[static_cast<std::size_t>(smallest)])
            ++smallest;
        cycle.assign(1, smallest);
        take(smallest);
        for (int t = 1; t < len; ++t) {
            const int v = pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))];
            take(v);
            cycle.push_back(v);
        }
        for (std::size_t k = 0; k < cycle.size(); ++k)
            perm[static_cast<std::size_t>(cycle[k] - 1)] = cycle[(k + 1) % cycle.size()];
    }
    return perm;
}

std::vector<int> permutation_cycle_lengths(std::span<const int> perm) {
    const int n = static_cast<int>(perm.size());
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int v : perm)
        if (v < 1 || v > n || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("permutation_cycle_lengths: not a permutation of 1..n");
        else
            seen[static_cast<std::size_t>(v)] = true;
    std::fill(seen.begin(), seen.end(), false);
    std::vector<int> out;
    for (int s = 1; s <= n; ++s) {
        if (seen[static_cast<std::size_t>(s)])
            continue;
        int len = 0;
        for (int x = s; !seen[static_cast<std::size_t>(x)]; x = perm[static_cast<std::size_t>(x - 1)]) {
            seen[static_cast<std::size_t>(x)] = true;
            ++len;
        }
        out.push_back(len);
    }
    return out;
}

}  // namespace derange
