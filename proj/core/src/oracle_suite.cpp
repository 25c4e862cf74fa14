#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "derange/counting.hpp"
#include "derange/oracle.hpp"

namespace derange::oracle {

namespace {

constexpr double kTol = 1e-10;

double rel_error(double got, double want, double abs_floor = 1e-13) {
    const double diff = std::abs(got - want);
    if (diff <= abs_floor)
        return 0.0;
    const double scale = std::max(std::abs(got), std::abs(want));
    return scale > 0.0 ? diff / scale : diff;
}

std::string label(int n, double theta) {
    std::ostringstream os;
    os << "n=" << n << " theta=" << theta;
    return os.str();
}

CheckReport named(const char* name) {
    CheckReport r;
    r.name = name;
    return r;
}

// Doubles are dyadic rationals, so the conversion is exact.
Rational to_rational(double v) {
    int exp = 0;
    const double mant = std::frexp(v, &exp);
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    Rational r(scaled);
    exp -= 53;
    Rational two_pow = 1;
    for (int i = 0; i < std::abs(exp); ++i)
        two_pow *= 2;
    if (exp >= 0)
        return r * two_pow;
    return r / two_pow;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::vector<Rational> lambda_recurrence_exact(const Rational& theta, int n_max) {
    std::vector<Rational> lam(static_cast<std::size_t>(n_max) + 1);
    lam[0] = 1;
    if (n_max >= 1)
        lam[1] = 0;
    for (int i = 2; i <= n_max; ++i)
        lam[static_cast<std::size_t>(i)] =
            Rational(i - 1) / (theta + i - 1) *
            (lam[static_cast<std::size_t>(i - 1)] +
             theta / (theta + i - 2) * lam[static_cast<std::size_t>(i - 2)]);
    return lam;
}

Rational rising_exact(const Rational& theta, int n) {
    Rational out = 1;
    for (int i = 0; i < n; ++i)
        out *= theta + i;
    return out;
}

long long falling(int c, int r) {
    long long out = 1;
    for (int i = 0; i < r; ++i)
        out *= c - i;
    return out;
}

// ---------------------------------------------------------------------------

CheckReport check_lambda_identities(const VerifyOptions& opt) {
    CheckReport rep = named("lambda recurrence identities");
    for (double th : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const LambdaTable table(th, 1000);
        for (int n = 0; n <= 100; ++n) {
            const auto alt = lambda_altsum(th, n);
            if (!alt.reliable)
                continue;
            const double err = rel_error(table[n], alt.value);
            rep.record(err <= 1e-9, err, "altsum " + label(n, th));
        }
        for (int n = 0; n <= 1000; ++n) {
            const double v = table[n];
            rep.record(v >= 0.0 && v <= 1.0, 0.0, "range " + label(n, th));
        }
        // λ_n - e^{-θ} ≈ θ(θ-1)e^{-θ}/n; the gap closes much faster at θ = 1.
        const double gap = std::abs(table[1000] - std::exp(-th));
        const double bound = th == 1.0 ? 1e-12 : 1.01 * th * std::abs(th - 1.0) * std::exp(-th) / 1000.0;
        rep.record(gap <= bound, gap, "limit e^-theta " + label(1000, th));
    }
    const LambdaTable unit(1.0, 15);
    for (int n = 0; n <= 15; ++n) {
        const double scaled = unit[n] * std::tgamma(n + 1.0);
        const BigInt dn = derangement_number(n);
        const double err = std::abs(scaled - dn.convert_to<double>());
        rep.record(BigInt(static_cast<long long>(std::llround(scaled))) == dn && err < 1e-3, err,
                   "n! lambda_n(1) = D_n at n=" + std::to_string(n));
    }
    for (double th : opt.thetas) {
        const Rational t = to_rational(th);
        const auto exact = lambda_recurrence_exact(t, 15);
        const LambdaTable table(th, 15);
        for (int n = 2; n <= 15; ++n) {
            const double err = rel_error(table[n], to_double(exact[static_cast<std::size_t>(n)]));
            rep.record(err <= 1e-13, err, "double vs rational recurrence " + label(n, th));
            if (n <= std::min(opt.max_n, kMaxCycleTypeN)) {
                const bool same = lambda_exact(n, t) == exact[static_cast<std::size_t>(n)];
                rep.record(same, 0.0, "rational recurrence vs enumeration " + label(n, th));
            }
        }
    }
    return rep;
}

CheckReport check_cycle_count_identity(const VerifyOptions& opt) {
    CheckReport rep = named("sum theta^k D(n,k) = lambda_n theta_(n)");
    for (int n = 2; n <= 15; ++n) {
        const auto dnk = derangement_cycle_counts(n);
        BigInt total = 0;
        for (const auto& d : dnk)
            total += d;
        rep.record(total == derangement_number(n), 0.0,
                   "sum_k D(n,k) = D_n at n=" + std::to_string(n));
        for (double th : opt.thetas) {
            const Rational t = to_rational(th);
            Rational lhs = 0, tk = 1;
            for (std::size_t k = 0; k < dnk.size(); ++k) {
                lhs += tk * Rational(dnk[k]);
                tk *= t;
            }
            const Rational rhs =
                lambda_recurrence_exact(t, n)[static_cast<std::size_t>(n)] * rising_exact(t, n);
            rep.record(lhs == rhs, 0.0, label(n, th));
        }
    }
    return rep;
}

CheckReport check_exact_formulas(const VerifyOptions& opt) {
    CheckReport rep = named("closed forms vs cycle-type enumeration");
    const int top = std::min(opt.max_n, 12);
    for (double th : opt.thetas) {
        const Rational t = to_rational(th);
        for (int n = 2; n <= top; ++n) {
            const ModelParams p{n, th};
            const auto types = enumerate_cycle_types_exact(n, t);
            auto cmp = [&](double got, const Rational& want, const std::string& what) {
                const double err = rel_error(got, to_double(want));
                rep.record(err <= kTol, err, what + " " + label(n, th));
            };

            Rational total = 0, mean_k = 0, single = 0;
            std::vector<Rational> k_law(static_cast<std::size_t>(n / 2) + 1, 0);
            for (const auto& e : types) {
                total += e.probability;
                mean_k += e.probability * e.type.num_cycles();
                k_law[static_cast<std::size_t>(e.type.num_cycles())] += e.probability;
                if (e.type.count(n) == 1)
                    single += e.probability;
            }
            rep.record(total == 1, 0.0, "enumeration normalises " + label(n, th));
            cmp(num_cycles_mean(p), mean_k, "E K");
            cmp(single_cycle_prob(p), single, "single cycle");
            for (int k = 1; k <= n / 2; ++k)
                cmp(num_cycles_pmf(p, k), k_law[static_cast<std::size_t>(k)],
                    "P(K=" + std::to_string(k) + ")");

            for (int j = 2; j <= n; ++j) {
                Rational mean_j = 0;
                std::vector<Rational> law(static_cast<std::size_t>(n / j) + 1, 0);
                for (const auto& e : types) {
                    mean_j += e.probability * e.type.count(j);
                    law[static_cast<std::size_t>(e.type.count(j))] += e.probability;
                }
                cmp(mean_cycle_count(p, j), mean_j, "E C_" + std::to_string(j));
                for (int r = 0; r <= n / j; ++r)
                    cmp(cycle_count_pmf(p, j, r), law[static_cast<std::size_t>(r)],
                        "P(C_" + std::to_string(j) + "=" + std::to_string(r) + ")");
            }

            const std::vector<MomentOrders> orders{{{2, 2}}, {{2, 1}, {3, 1}}, {{3, 2}},
                                                   {{2, 1}, {4, 1}}, {{2, 3}}};
            for (const auto& ord : orders) {
                Rational want = 0;
                for (const auto& e : types) {
                    long long f = 1;
                    for (const auto& [j, r] : ord)
                        f *= falling(e.type.count(j), r);
                    want += e.probability * f;
                }
                std::string what = "factorial moment";
                for (const auto& [j, r] : ord)
                    what += " r" + std::to_string(j) + "=" + std::to_string(r);
                cmp(factorial_moment(p, ord), want, what);
            }
        }
    }
    return rep;
}

CheckReport check_eta_law(const VerifyOptions& opt) {
    CheckReport rep = named("eta law: xi product, chain path, normaliser");
    for (double th : opt.thetas) {
        const LambdaTable table(th, 20);
        for (int n = 2; n <= 20; ++n) {
            const EtaLaw law(n, th);
            const ModelParams p{n, th};
            double err = rel_error(static_cast<double>(law.normaliser()), table[n]);
            rep.record(err <= 1e-12, err, "normaliser vs lambda " + label(n, th));
            err = rel_error(composition_normaliser(p), table[n]);
            rep.record(err <= 1e-12, err, "composition DP vs lambda " + label(n, th));

            if (n <= 16) {
                for (std::size_t k = 0; k < law.support().size(); ++k) {
                    const auto& r = law.support()[k];
                    const double got = chain_path_probability(r, th);
                    err = rel_error(got, static_cast<double>(law.probabilities()[k]));
                    rep.record(err <= 1e-12, err, "path " + r.to_string() + " " + label(n, th));
                }
            }
        }
    }
    return rep;
}

CheckReport check_eta_aggregation(const VerifyOptions& opt) {
    CheckReport rep = named("eta law aggregates to cycle types and first-cycle law");
    const int top = std::min(opt.max_n, 12);
    for (double th : opt.thetas) {
        for (int n = 2; n <= top; ++n) {
            const ModelParams p{n, th};
            const EtaLaw law(n, th);
            std::map<CycleType, long double> by_type;
            std::vector<long double> first(static_cast<std::size_t>(n) + 1, 0.0L);
            for (std::size_t k = 0; k < law.support().size(); ++k) {
                const auto lengths = eta_to_lengths(law.support()[k]);
                rep.record(lengths.valid(n), 0.0, "lengths of " + law.support()[k].to_string());
                by_type[lengths.cycle_type(n)] += law.probabilities()[k];
                first[static_cast<std::size_t>(lengths.values.front())] += law.probabilities()[k];
            }
            const auto types = enumerate_cycle_types(p);
            rep.record(types.size() == by_type.size(), 0.0, "type count " + label(n, th));
            for (const auto& e : types) {
                const auto it = by_type.find(e.type);
                const double got = it == by_type.end() ? 0.0 : static_cast<double>(it->second);
                const double err = rel_error(got, e.probability);
                rep.record(err <= kTol, err, e.type.to_string() + " " + label(n, th));
            }
            long double tail = 1.0L;
            for (int l = 0; l <= n; ++l) {
                tail -= first[static_cast<std::size_t>(l)];
                const double err =
                    rel_error(first_cycle_survival(p, l), static_cast<double>(tail), 1e-12);
                rep.record(err <= kTol, err, "P(A1>" + std::to_string(l) + ") " + label(n, th));
            }
        }
    }
    return rep;
}

CheckReport check_shift_and_proposition(const VerifyOptions& opt) {
    CheckReport rep = named("shift ratio and ratio proposition");
    const int shift_top = std::min(opt.max_n, kMaxShiftN);
    for (double th : opt.thetas)
        for (int n = 5; n <= shift_top; ++n)
            rep.merge(verify_shift_ratio(n, th));
    const int prop_top = std::min(opt.max_n, kMaxProportionN);
    for (int n = 2; n <= prop_top; ++n)
        rep.merge(verify_ratio_proposition(n, opt.thetas));
    return rep;
}

// Shifts the 1s at σ_1, σ_3, … of an odd sequence down by one place.
EtaSequence odd_to_even(const EtaSequence& r) {
    const auto sig = r.one_positions();
    EtaSequence out = r;
    for (std::size_t i = 0; i + 1 < sig.size(); i += 2)
        out = shift(out, sig[i]).target;
    return out;
}

bool all_lengths(const OrderedCycleLengths& l, int parity) {
    return std::all_of(l.values.begin(), l.values.end(), [parity](int a) { return a % 2 == parity; });
}

// Some odd-indexed cycle (1st, 3rd, …) has length 2.
bool odd_indexed_pair(const OrderedCycleLengths& l) {
    for (std::size_t i = 0; i < l.values.size(); i += 2)
        if (l.values[i] == 2)
            return true;
    return false;
}

CheckReport check_parity(const VerifyOptions& opt) {
    CheckReport rep = named("parity theorem: alpha_n < beta_n");
    for (double th : opt.thetas) {
        for (int n = 2; n <= 24; ++n) {
            const ModelParams p{n, th};
            const auto enumerated = parity_probabilities(p);
            const auto dp = parity_probabilities_dp(p);
            double err = std::max(rel_error(enumerated.all_odd, dp.all_odd),
                                  rel_error(enumerated.all_even, dp.all_even));
            rep.record(err <= kTol, err, "enumeration vs DP " + label(n, th));
            if (n % 2 == 1) {
                rep.record(enumerated.all_even == 0.0, enumerated.all_even,
                           "beta = 0 for odd " + label(n, th));
                continue;
            }
            rep.record(enumerated.all_odd < enumerated.all_even, 0.0,
                       "alpha < beta " + label(n, th));

            const EtaLaw law(n, th);
            long double lhs = 0.0L, rhs = 0.0L;
            for (std::size_t k = 0; k < law.support().size(); ++k) {
                const auto& r = law.support()[k];
                const auto lengths = eta_to_lengths(r);
                const long double pr = law.probabilities()[k];
                if (all_lengths(lengths, 0)) {
                    const bool k_even = lengths.size() % 2 == 0;
                    if (k_even && !odd_indexed_pair(lengths))
                        lhs += pr;
                }
                if (all_lengths(lengths, 1)) {
                    const auto sig = r.one_positions();
                    long double phi = 1.0L;
                    for (std::size_t i = 0; i + 1 < sig.size(); i += 2)
                        phi *= (sig[i] - 1.0L) / (sig[i] - 2.0L);
                    rhs += phi * pr;

                    const EtaSequence image = odd_to_even(r);
                    const auto img_lengths = eta_to_lengths(image);
                    const bool lands = image.admissible() && image.ones() == r.ones() &&
                                       all_lengths(img_lengths, 0) &&
                                       !odd_indexed_pair(img_lengths);
                    err = rel_error(static_cast<double>(law.pmf(image) / pr),
                                    static_cast<double>(phi));
                    rep.record(lands && phi > 1.0L && err <= kTol, err,
                               "odd-to-even image of " + r.to_string());
                }
            }
            err = rel_error(static_cast<double>(lhs), static_cast<double>(rhs));
            rep.record(err <= kTol, err, "parity identity " + label(n, th));
        }
    }
    return rep;
}

CheckReport check_monotone(const VerifyOptions& opt) {
    CheckReport rep = named("monotone theorem: decreasing > increasing");
    for (double th : opt.thetas) {
        for (int n = 2; n <= kMaxDeltaN; ++n) {
            const ModelParams p{n, th};
            const auto m = monotone_probabilities(p);
            const auto dp = monotone_probabilities_dp(p);
            double err = std::max(rel_error(m.decreasing, dp.decreasing),
                                  rel_error(m.increasing, dp.increasing));
            rep.record(err <= kTol, err, "enumeration vs DP " + label(n, th));
            if (n <= 4) {
                err = std::max(std::abs(m.decreasing - 1.0), std::abs(m.increasing - 1.0));
                rep.record(err <= 1e-12, err, "all sequences monotone " + label(n, th));
                continue;
            }
            rep.record(m.decreasing > m.increasing, 0.0, "decreasing > increasing " + label(n, th));

            const EtaLaw law(n, th);
            long double rhs = 0.0L;
            for (std::size_t k = 0; k < law.support().size(); ++k) {
                const auto& r = law.support()[k];
                const auto rev = r.reversed();
                const bool inc = eta_to_lengths(r).weakly_increasing();
                const bool rev_dec = eta_to_lengths(rev).weakly_decreasing();
                rep.record(rev.admissible() && rev.reversed() == r && inc == rev_dec, 0.0,
                           "inversion of " + r.to_string());
                if (!inc)
                    continue;
                const auto sig = r.one_positions();
                long double ratio = 1.0L;
                for (std::size_t i = 0; i + 1 < sig.size(); ++i)
                    ratio *= (sig[i] - 1.0L) / (n + 1.0L - sig[i]);
                const long double pr = law.probabilities()[k];
                rhs += ratio * pr;
                err = rel_error(static_cast<double>(law.pmf(rev) / pr), static_cast<double>(ratio));
                const bool order_ok = rev == r ? std::abs(ratio - 1.0L) < 1e-12L : ratio > 1.0L;
                rep.record(order_ok && err <= kTol, err, "inversion ratio of " + r.to_string());
            }
            err = rel_error(m.decreasing, static_cast<double>(rhs));
            rep.record(err <= kTol, err, "decreasing identity " + label(n, th));
        }
    }
    return rep;
}

CheckReport check_poisson_acceptance(const VerifyOptions& opt) {
    CheckReport rep = named("conditioned Poisson acceptance closed form vs convolution");
    for (double th : opt.thetas) {
        const TiltSolution tilt = solve_tilt(th);
        for (int n = 2; n <= 40; ++n) {
            const ModelParams p{n, th};
            for (double x : {1.0, tilt.x(n)}) {
                const double err =
                    rel_error(poisson_acceptance_probability(p, x), poisson_acceptance_dp(p, x));
                rep.record(err <= kTol, err, label(n, th) + " x=" + std::to_string(x));
            }
        }
    }
    return rep;
}

}  // namespace

std::vector<CheckReport> verify_all(const VerifyOptions& options) {
    if (options.max_n < 2)
        throw std::invalid_argument("verify_all: max_n must be at least 2");
    if (options.thetas.empty())
        throw std::invalid_argument("verify_all: need at least one theta");
    for (double th : options.thetas)
        if (!(th > 0.0) || !std::isfinite(th))
            throw std::invalid_argument("verify_all: theta values must be positive and finite");

    return {check_lambda_identities(options),  check_cycle_count_identity(options),
            check_exact_formulas(options),     check_eta_law(options),
            check_eta_aggregation(options),    check_shift_and_proposition(options),
            check_parity(options),             check_monotone(options),
            check_poisson_acceptance(options)};
}

}  // namespace derange::oracle
