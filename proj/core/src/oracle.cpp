#include "derange/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "derange/counting.hpp"

namespace derange::oracle {

namespace {

void require_range(int n, int lo, int hi, const char* what) {
    if (n < lo || n > hi)
        throw std::out_of_range(std::string(what) + ": n=" + std::to_string(n) + " outside " +
                                std::to_string(lo) + ".." + std::to_string(hi));
}

// Visits every multiset of parts >= 2 summing to n, as cycle-count vectors.
void for_each_cycle_type(int n, const std::function<void(const CycleType&)>& visit) {
    CycleType current(n);
    std::function<void(int, int)> rec = [&](int remaining, int max_part) {
        if (remaining == 0) {
            visit(current);
            return;
        }
        for (int part = std::min(remaining, max_part); part >= 2; --part) {
            if (remaining - part == 1)
                continue;
            current.add_cycle(part);
            rec(remaining - part, part);
            current.remove_cycle(part);
        }
    };
    rec(n, n);
}

Rational rational_pow(const Rational& base, int e) {
    Rational out = 1;
    for (int i = 0; i < e; ++i)
        out *= base;
    return out;
}

Rational rational_factorial(int n) {
    Rational out = 1;
    for (int i = 2; i <= n; ++i)
        out *= i;
    return out;
}

Rational rising_factorial_exact(const Rational& theta, int n) {
    Rational out = 1;
    for (int i = 0; i < n; ++i)
        out *= theta + i;
    return out;
}

// ∏ (θ/j)^{c_j} / c_j!
Rational type_weight_exact(const CycleType& t, const Rational& theta) {
    Rational w = 1;
    for (int j = 2; j <= t.n(); ++j) {
        const int c = t.count(j);
        if (c == 0)
            continue;
        w *= rational_pow(theta / j, c) / rational_factorial(c);
    }
    return w;
}

double rel_error(double got, double want, double abs_floor = 1e-13) {
    const double diff = std::abs(got - want);
    if (diff <= abs_floor)
        return 0.0;
    const double scale = std::max(std::abs(got), std::abs(want));
    return scale > 0.0 ? diff / scale : diff;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ξ weights: q_i = P(ξ_i = 0), p_i = P(ξ_i = 1), prefix products of q for the DPs.
class XiWeights {
public:
    XiWeights(int n, double theta) : theta_(theta), prefix_(static_cast<std::size_t>(n) + 1, 1.0L) {
        for (int i = 2; i <= n; ++i)
            prefix_[static_cast<std::size_t>(i)] =
                prefix_[static_cast<std::size_t>(i - 1)] * q(i);
    }
    long double q(int i) const { return (i - 1) / (static_cast<long double>(theta_) + i - 1); }
    long double p(int i) const {
        return i == 1 ? 1.0L : theta_ / (static_cast<long double>(theta_) + i - 1);
    }
    // Weight of a part of length a whose top cell is position m (a 1 sits at m+1).
    long double part(int m, int a) const {
        const int low = m - a + 1;
        return prefix_[static_cast<std::size_t>(m)] / prefix_[static_cast<std::size_t>(low)] * p(low);
    }

private:
    double theta_;
    std::vector<long double> prefix_;
};

long double composition_total(int n, double theta, const std::function<bool(int)>& part_ok) {
    const XiWeights w(n, theta);
    std::vector<long double> g(static_cast<std::size_t>(n) + 1, 0.0L);
    g[0] = 1.0L;
    for (int m = 2; m <= n; ++m) {
        long double acc = 0.0L;
        for (int a = 2; a <= m; ++a)
            if (part_ok(a))
                acc += w.part(m, a) * g[static_cast<std::size_t>(m - a)];
        g[static_cast<std::size_t>(m)] = acc;
    }
    return g[static_cast<std::size_t>(n)];
}

// Total weight of compositions whose consecutive parts are weakly decreasing
// (decreasing = true) or weakly increasing, read from the top boundary down.
long double monotone_total(int n, double theta, bool decreasing) {
    const XiWeights w(n, theta);
    const auto N = static_cast<std::size_t>(n) + 1;
    // f[m][b]: weight of filling the lowest m cells given the part above has length b.
    std::vector<std::vector<long double>> f(N, std::vector<long double>(N + 1, 0.0L));
    std::fill(f[0].begin(), f[0].end(), 1.0L);
    std::vector<long double> term(N + 1);
    for (int m = 2; m <= n; ++m) {
        std::fill(term.begin(), term.end(), 0.0L);
        for (int a = 2; a <= m; ++a)
            term[static_cast<std::size_t>(a)] =
                w.part(m, a) * f[static_cast<std::size_t>(m - a)][static_cast<std::size_t>(a)];
        auto& row = f[static_cast<std::size_t>(m)];
        if (decreasing) {
            long double acc = 0.0L;
            for (int b = 0; b <= n; ++b) {
                if (b >= 2 && b <= m)
                    acc += term[static_cast<std::size_t>(b)];
                row[static_cast<std::size_t>(b)] = acc;
            }
        } else {
            long double acc = 0.0L;
            for (int b = n; b >= 0; --b) {
                if (b >= 2 && b <= m)
                    acc += term[static_cast<std::size_t>(b)];
                row[static_cast<std::size_t>(b)] = acc;
            }
        }
    }
    return decreasing ? f[static_cast<std::size_t>(n)][static_cast<std::size_t>(n)]
                      : f[static_cast<std::size_t>(n)][0];
}

bool all_parts(const OrderedCycleLengths& l, bool odd) {
    return std::all_of(l.values.begin(), l.values.end(),
                       [odd](int a) { return (a % 2 == 1) == odd; });
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<ExactCycleType> enumerate_cycle_types_exact(int n, const Rational& theta) {
    require_range(n, 2, kMaxCycleTypeN, "enumerate_cycle_types");
    if (theta <= 0)
        throw std::invalid_argument("enumerate_cycle_types: theta must be positive");
    std::vector<ExactCycleType> out;
    Rational total = 0;
    for_each_cycle_type(n, [&](const CycleType& t) {
        Rational w = type_weight_exact(t, theta);
        total += w;
        out.push_back({t, std::move(w)});
    });
    for (auto& e : out)
        e.probability /= total;
    return out;
}

std::vector<WeightedCycleType> enumerate_cycle_types(const ModelParams& params) {
    params.validate();
    require_range(params.n, 2, kMaxCycleTypeN, "enumerate_cycle_types");
    std::vector<WeightedCycleType> out;
    std::vector<long double> weights;
    long double total = 0.0L;
    for_each_cycle_type(params.n, [&](const CycleType& t) {
        long double w = 1.0L;
        for (int j = 2; j <= t.n(); ++j)
            for (int c = 1; c <= t.count(j); ++c)
                w *= params.theta / static_cast<long double>(j) / c;
        total += w;
        weights.push_back(w);
        out.push_back({t, 0.0});
    });
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].probability = static_cast<double>(weights[i] / total);
    return out;
}

Rational lambda_exact(int n, const Rational& theta) {
    if (n == 0)
        return 1;
    if (n == 1)
        return 0;
    require_range(n, 2, kMaxCycleTypeN, "lambda_exact");
    Rational total = 0;
    for_each_cycle_type(n, [&](const CycleType& t) { total += type_weight_exact(t, theta); });
    return total * rational_factorial(n) / rising_factorial_exact(theta, n);
}

std::vector<EtaSequence> enumerate_delta(int n) {
    require_range(n, 2, kMaxDeltaN, "enumerate_delta");
    std::vector<EtaSequence> out;
    std::vector<int> parts;
    std::function<void(int)> rec = [&](int remaining) {
        if (remaining == 0) {
            out.push_back(EtaSequence::from_lengths(parts));
            return;
        }
        for (int a = 2; a <= remaining; ++a) {
            if (remaining - a == 1)
                continue;
            parts.push_back(a);
            rec(remaining - a);
            parts.pop_back();
        }
    };
    rec(n);
    return out;
}

long double xi_probability(const EtaSequence& r, double theta) {
    long double p = 1.0L;
    const long double th = theta;
    for (int i = 2; i <= r.n(); ++i)
        p *= r.at(i) ? th / (th + i - 1) : (i - 1) / (th + i - 1);
    return r.at(1) ? p : 0.0L;
}

EtaLaw::EtaLaw(int n, double theta) : n_(n), theta_(theta), support_(enumerate_delta(n)) {
    if (!(theta > 0.0))
        throw std::invalid_argument("EtaLaw: theta must be positive");
    probs_.reserve(support_.size());
    for (const auto& r : support_) {
        probs_.push_back(xi_probability(r, theta));
        normaliser_ += probs_.back();
    }
    for (auto& p : probs_)
        p /= normaliser_;
}

long double EtaLaw::pmf(const EtaSequence& eta) const {
    if (eta.n() != n_ || !eta.admissible())
        throw std::invalid_argument("EtaLaw::pmf: sequence " + eta.to_string() + " not in Delta_" +
                                    std::to_string(n_));
    return xi_probability(eta, theta_) / normaliser_;
}

double exact_eta_pmf(const EtaSequence& eta, double theta) {
    return static_cast<double>(EtaLaw(eta.n(), theta).pmf(eta));
}

double chain_path_probability(const EtaSequence& eta, double theta) {
    const int n = eta.n();
    if (n < 2)
        throw std::invalid_argument("chain_path_probability: n must be at least 2");
    const LambdaTable table(theta, n);
    double p = 1.0;
    int prev = 1;  // η_{n+1}
    for (int i = n; i >= 1; --i) {
        const int bit = eta.at(i);
        if (i == 1) {
            p *= bit == 1 ? 1.0 : 0.0;
        } else if (i == 2 || prev == 1) {
            p *= bit == 0 ? 1.0 : 0.0;
        } else {
            const TransitionRow row = transition_row(i, table);
            p *= bit == 1 ? row.p_emit1 : row.p_stay0;
        }
        prev = bit;
    }
    return p;
}

ShiftResult shift(const EtaSequence& eta, int i) {
    if (i < 4 || i > eta.n() - 1)
        throw std::out_of_range("shift: position " + std::to_string(i) + " outside 4..n-1");
    ShiftResult out{eta, eta, i, false};
    if (eta.at(i) == 1 && eta.at(i - 2) == 0) {
        out.target.set(i, 0);
        out.target.set(i - 1, 1);
        out.moved = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

void CheckReport::record(bool pass, double error, const std::string& what) {
    ++checked;
    max_error = std::max(max_error, error);
    if (!pass) {
        if (violations == 0)
            first_violation = what;
        ++violations;
    }
}

void CheckReport::merge(const CheckReport& other) {
    checked += other.checked;
    if (other.violations && violations == 0)
        first_violation = other.first_violation;
    violations += other.violations;
    max_error = std::max(max_error, other.max_error);
}

CheckReport verify_shift_ratio(int n, double theta) {
    require_range(n, 2, kMaxShiftN, "verify_shift_ratio");
    CheckReport report;
    report.name = "shift ratio (i-1)/(i-2)";
    const EtaLaw law(n, theta);
    for (std::size_t k = 0; k < law.support().size(); ++k) {
        const auto& r = law.support()[k];
        for (int i = 4; i <= n - 1; ++i) {
            const ShiftResult s = shift(r, i);
            if (!s.moved)
                continue;
            const bool structural = s.target.admissible() && s.target.ones() == r.ones();
            const double ratio = static_cast<double>(law.pmf(s.target) / law.probabilities()[k]);
            const double want = (i - 1.0) / (i - 2.0);
            const double err = rel_error(ratio, want);
            report.record(structural && err <= 1e-10, err,
                          r.to_string() + " i=" + std::to_string(i) + " ratio=" + fmt(ratio));
        }
    }
    return report;
}

CheckReport verify_ratio_proposition(int n, std::span<const double> thetas) {
    require_range(n, 2, kMaxProportionN, "verify_ratio_proposition");
    if (thetas.empty())
        throw std::invalid_argument("verify_ratio_proposition: need at least one theta");
    CheckReport report;
    report.name = "ratio proposition";
    std::vector<EtaLaw> laws;
    for (double th : thetas)
        laws.emplace_back(n, th);
    const auto& support = laws.front().support();

    // ln ∏_{j=1}^{b-1} (σ_j - 1), grouped by |r|.
    std::map<int, std::vector<std::size_t>> by_ones;
    std::vector<long double> sigma_prod(support.size(), 1.0L);
    for (std::size_t k = 0; k < support.size(); ++k) {
        by_ones[support[k].ones()].push_back(k);
        const auto sig = support[k].one_positions();
        for (std::size_t j = 0; j + 1 < sig.size(); ++j)
            sigma_prod[k] *= sig[j] - 1;
    }
    for (const auto& [ones, members] : by_ones) {
        for (std::size_t a : members)
            for (std::size_t b : members) {
                const double want = static_cast<double>(sigma_prod[b] / sigma_prod[a]);
                double first = 0.0;
                for (std::size_t t = 0; t < laws.size(); ++t) {
                    const auto probs = laws[t].probabilities();
                    const double got = static_cast<double>(probs[a] / probs[b]);
                    if (t == 0)
                        first = got;
                    const double err = std::max(rel_error(got, want), rel_error(got, first));
                    report.record(err <= 1e-10, err,
                                  support[a].to_string() + " vs " + support[b].to_string() +
                                      " theta=" + fmt(thetas[t]));
                }
            }
    }
    return report;
}

ParityProbabilities parity_probabilities(const ModelParams& params) {
    params.validate();
    if (params.n > kMaxDeltaN)
        return parity_probabilities_dp(params);
    const EtaLaw law(params.n, params.theta);
    long double odd = 0.0L, even = 0.0L;
    for (std::size_t k = 0; k < law.support().size(); ++k) {
        const auto lengths = eta_to_lengths(law.support()[k]);
        if (all_parts(lengths, true))
            odd += law.probabilities()[k];
        if (all_parts(lengths, false))
            even += law.probabilities()[k];
    }
    return {static_cast<double>(odd), static_cast<double>(even)};
}

ParityProbabilities parity_probabilities_dp(const ModelParams& params) {
    params.validate();
    require_range(params.n, 2, kMaxCompositionDpN, "parity_probabilities_dp");
    const long double all = composition_total(params.n, params.theta, [](int) { return true; });
    const long double odd =
        composition_total(params.n, params.theta, [](int a) { return a % 2 == 1; });
    const long double even =
        params.n % 2 == 1
            ? 0.0L
            : composition_total(params.n, params.theta, [](int a) { return a % 2 == 0; });
    return {static_cast<double>(odd / all), static_cast<double>(even / all)};
}

MonotoneProbabilities monotone_probabilities(const ModelParams& params) {
    params.validate();
    if (params.n > kMaxDeltaN)
        return monotone_probabilities_dp(params);
    const EtaLaw law(params.n, params.theta);
    long double dec = 0.0L, inc = 0.0L;
    for (std::size_t k = 0; k < law.support().size(); ++k) {
        const auto lengths = eta_to_lengths(law.support()[k]);
        if (lengths.weakly_decreasing())
            dec += law.probabilities()[k];
        if (lengths.weakly_increasing())
            inc += law.probabilities()[k];
    }
    return {static_cast<double>(dec), static_cast<double>(inc)};
}

MonotoneProbabilities monotone_probabilities_dp(const ModelParams& params) {
    params.validate();
    require_range(params.n, 2, kMaxCompositionDpN, "monotone_probabilities_dp");
    const long double all = composition_total(params.n, params.theta, [](int) { return true; });
    return {static_cast<double>(monotone_total(params.n, params.theta, true) / all),
            static_cast<double>(monotone_total(params.n, params.theta, false) / all)};
}

double composition_normaliser(const ModelParams& params) {
    params.validate();
    require_range(params.n, 2, kMaxCompositionDpN, "composition_normaliser");
    return static_cast<double>(
        composition_total(params.n, params.theta, [](int) { return true; }));
}

double poisson_acceptance_dp(const ModelParams& params, double x) {
    params.validate();
    require_range(params.n, 2, kMaxCompositionDpN, "poisson_acceptance_dp");
    if (!(x > 0.0))
        throw std::invalid_argument("poisson_acceptance_dp: x must be positive");
    const int n = params.n;
    std::vector<long double> dist(static_cast<std::size_t>(n) + 1, 0.0L);
    dist[0] = 1.0L;
    std::vector<long double> next(dist.size());
    long double xj = x;
    for (int j = 2; j <= n; ++j) {
        xj *= x;
        const long double mean = params.theta * xj / j;
        // pmf of j·Z_j on 0, j, 2j, … <= n
        std::vector<long double> pmf;
        long double term = std::exp(-mean);
        for (int z = 0; z * j <= n; ++z) {
            pmf.push_back(term);
            term *= mean / (z + 1);
        }
        std::fill(next.begin(), next.end(), 0.0L);
        for (int t = 0; t <= n; ++t) {
            if (dist[static_cast<std::size_t>(t)] == 0.0L)
                continue;
            for (std::size_t z = 0; t + static_cast<int>(z) * j <= n; ++z)
                next[static_cast<std::size_t>(t) + z * static_cast<std::size_t>(j)] +=
                    dist[static_cast<std::size_t>(t)] * pmf[z];
        }
        dist.swap(next);
    }
    return static_cast<double>(dist[static_cast<std::size_t>(n)]);
}

}  // namespace derange::oracle
