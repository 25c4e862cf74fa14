// One PASS/FAIL line per acceptance criterion. `acceptance N` runs criterion N only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "derange/chain.hpp"
#include "derange/counting.hpp"
#include "derange/exact.hpp"
#include "derange/harness.hpp"
#include "derange/oracle.hpp"

using namespace derange;

namespace {

constexpr std::uint64_t kSeed = 20240531;
constexpr std::array<double, 3> kThetas{0.5, 1.0, 5.0};
constexpr std::array<int, 3> kSizes{10, 50, 250};

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& what) {
        if (pass)
            detail = what;
        pass = false;
    }
};

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::string cell(int n, double theta) { return fmt("n=%d theta=%g", n, theta); }

// Value printed with `decimals` places, compared to the same rounding.
bool matches_decimals(double value, double printed, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::abs(std::round(value * scale) - std::round(printed * scale)) < 0.5;
}

// Same for `digits` significant figures.
bool matches_significant(double value, double printed, int digits) {
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(printed))));
    return matches_decimals(value, printed, digits - 1 - exponent);
}

Outcome lambda_identities() {
    Outcome out;
    const LambdaTable one(1.0, 15);
    double factorial = 1.0;
    for (int n = 0; n <= 15; ++n) {
        if (n > 0)
            factorial *= n;
        const double scaled = factorial * one[n];
        const BigInt d = derangement_number(n);
        if (BigInt(std::llround(scaled)) != d || std::abs(scaled - d.convert_to<double>()) > 1e-3)
            out.fail(fmt("n!*lambda_n(1) = %.6f at n=%d", scaled, n));
    }
    struct Expect {
        int n;
        double theta;
        double value;
    };
    const std::vector<Expect> expected{{10, 0.5, 0.591}, {50, 0.5, 0.604}, {10, 1.0, 0.368},
                                       {50, 1.0, 0.368}, {250, 1.0, 0.368}, {10, 5.0, 0.023},
                                       {250, 5.0, 0.007}};
    for (const auto& e : expected) {
        const double v = LambdaTable(e.theta, e.n)[e.n];
        if (!matches_decimals(v, e.value, 3))
            out.fail(fmt("lambda %s = %.5f, published %.3f", cell(e.n, e.theta).c_str(), v, e.value));
    }
    if (out.pass)
        out.detail = "D_n for n<=15 and 7 published cells";
    return out;
}

Outcome oeis_cross_check() {
    Outcome out;
    const std::vector<long> want{2, 6, 24, 160, 1140, 8988};
    std::string got;
    for (int n = 3; n <= 8; ++n) {
        const double v = derangement_number(n).convert_to<double>() * cycle_count_pmf({n, 1.0}, 2, 0);
        const long rounded = std::lround(v);
        got += (got.empty() ? "" : ",") + std::to_string(rounded);
        if (std::abs(v - static_cast<double>(rounded)) > 1e-6 ||
            rounded != want[static_cast<std::size_t>(n - 3)])
            out.fail(fmt("n=%d gives %.9f", n, v));
    }
    if (out.pass)
        out.detail = got;
    return out;
}

Outcome single_cycle_values() {
    Outcome out;
    struct Expect {
        int n;
        double theta;
        double value;
        bool significant;  // digits are significant figures rather than decimals
        int digits;
    };
    const std::vector<Expect> expected{{10, 0.5, 0.480, false, 3}, {10, 1.0, 0.272, false, 3},
                                       {10, 5.0, 0.021, false, 3}, {50, 5.0, 3.29e-5, true, 3},
                                       {250, 5.0, 1.62e-8, true, 3}};
    for (const auto& e : expected) {
        const double v = single_cycle_prob({e.n, e.theta});
        const bool ok = e.significant ? matches_significant(v, e.value, e.digits)
                                      : matches_decimals(v, e.value, e.digits);
        if (!ok)
            out.fail(fmt("%s gives %.6g, published %g", cell(e.n, e.theta).c_str(), v, e.value));
    }
    if (out.pass)
        out.detail = "5 cells of the exact column";
    return out;
}

Outcome tilt_solver() {
    Outcome out;
    const std::vector<std::pair<double, double>> expected{{0.5, -1.256}, {1.0, 0.0}, {5.0, 4.965}};
    for (const auto& [theta, c] : expected) {
        const auto tilt = solve_tilt(theta);
        if (!matches_decimals(tilt.c, c, 3))
            out.fail(fmt("c(%g) = %.6f, published %.3f", theta, tilt.c, c));
    }
    const double speedup = solve_tilt(5.0).speedup;
    if (std::abs(speedup - 379.6) > 0.1)
        out.fail(fmt("e^u(c) at theta=5 is %.4f", speedup));
    if (out.pass)
        out.detail = fmt("e^u(c) = %.3f at theta=5", speedup);
    return out;
}

Outcome distinct_limit() {
    Outcome out;
    const std::array<double, 3> expected{0.929, 0.763, 0.012};
    for (std::size_t i = 0; i < kThetas.size(); ++i) {
        const double v = distinct_lengths_limit(kThetas[i]);
        if (!matches_decimals(v, expected[i], 3))
            out.fail(fmt("theta=%g gives %.5f, published %.3f", kThetas[i], v, expected[i]));
    }
    if (out.pass)
        out.detail = "3 cells";
    return out;
}

Outcome sampler_equivalence() {
    Outcome out;
    constexpr int n = 8;
    double worst_tv = 0.0, worst_p = 1.0;
    for (double theta : kThetas) {
        const auto types = oracle::enumerate_cycle_types({n, theta});
        for (Method method : {Method::chain, Method::feller, Method::poisson}) {
            const std::uint64_t reps = method == Method::chain ? 1'000'000 : 100'000;
            const double tv_limit = method == Method::chain ? 0.005 : 0.02;
            auto sampler = make_sampler(method, {n, theta});
            RngStream rng(kSeed);
            std::map<CycleType, std::uint64_t> counts;
            std::vector<int> lengths;
            for (std::uint64_t i = 0; i < reps; ++i) {
                sampler->sample_lengths(rng, lengths);
                ++counts[CycleType::from_lengths(n, lengths)];
            }
            double tv = 0.0, chi2 = 0.0;
            std::uint64_t matched = 0;
            for (const auto& t : types) {
                const auto it = counts.find(t.type);
                const double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
                matched += static_cast<std::uint64_t>(observed);
                const double expected = t.probability * static_cast<double>(reps);
                tv += std::abs(observed / static_cast<double>(reps) - t.probability);
                chi2 += (observed - expected) * (observed - expected) / expected;
            }
            tv *= 0.5;
            const boost::math::chi_squared dist(static_cast<double>(types.size() - 1));
            const double p = boost::math::cdf(boost::math::complement(dist, chi2));
            const std::string where =
                fmt("%s theta=%g", std::string(method_name(method)).c_str(), theta);
            if (matched != reps)
                out.fail(where + ": sample outside the support");
            if (tv >= tv_limit)
                out.fail(fmt("%s: TV %.5f", where.c_str(), tv));
            if (p <= 0.001)
                out.fail(fmt("%s: chi-square p %.2e", where.c_str(), p));
            worst_tv = std::max(worst_tv, tv);
            worst_p = std::min(worst_p, p);
        }
    }
    if (out.pass)
        out.detail = fmt("max TV %.5f, min chi-square p %.3f", worst_tv, worst_p);
    return out;
}

struct PublishedCell {
    int table;
    std::string row;
    std::string column;
    double value;
};

std::vector<PublishedCell> published_cells() {
    std::vector<PublishedCell> cells;
    auto add_grid = [&](int table, std::string_view suffix, const std::vector<std::string>& rows,
                        const std::vector<std::array<double, 3>>& values) {
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t t = 0; t < kThetas.size(); ++t)
                cells.push_back({table, rows[r], fmt("theta=%g %s", kThetas[t], suffix.data()),
                                 values[r][t]});
    };
    add_grid(5, "distinct", {"10", "50", "250"},
             {{0.885, 0.774, 0.357}, {0.920, 0.776, 0.091}, {0.927, 0.765, 0.028}});
    add_grid(6, "alpha", {"10", "11", "50", "51", "250", "251"},
             {{0.162, 0.185, 0.071},
              {0.469, 0.278, 0.062},
              {0.173, 0.105, 0.004},
              {0.261, 0.114, 0.004},
              {0.133, 0.049, 9e-5},
              {0.160, 0.051, 6e-5}});
    add_grid(6, "beta", {"10", "50", "250"},
             {{0.777, 0.666, 0.496}, {0.513, 0.306, 0.033}, {0.342, 0.138, 8.9e-4}});
    add_grid(8, "o_n", {"10", "50", "250"},
             {{0.847, 0.766, 0.604}, {0.775, 0.652, 0.356}, {0.761, 0.630, 0.311}});
    add_grid(9, "decreasing", {"10", "50", "250"},
             {{0.833, 0.730, 0.486}, {0.666, 0.433, 0.023}, {0.561, 0.257, 4.2e-4}});
    add_grid(9, "increasing", {"10", "50", "250"},
             {{0.646, 0.475, 0.216}, {0.287, 0.101, 3.5e-4}, {0.130, 0.020, 0.0}});
    return cells;
}

// Binomial standard error; a zero count is treated as one success.
double binomial_se(double p, double reps) {
    const double q = std::max(p, 1.0 / reps);
    return std::sqrt(q * (1.0 - q) / reps);
}

Outcome table_reproduction() {
    Outcome out;
    TableOptions options;
    options.reps = 100'000;
    options.seed = kSeed;
    options.timings = false;
    std::map<int, Table> tables;
    for (int id : {5, 6, 8, 9})
        tables.emplace(id, reproduce_table(id, options));

    const double reps = static_cast<double>(options.reps);
    double worst = 0.0;
    int checked = 0;
    for (const auto& c : published_cells()) {
        const auto v = tables.at(c.table).value(c.row, c.column);
        if (!v) {
            out.fail(fmt("table %d row %s column %s is blank", c.table, c.row.c_str(), c.column.c_str()));
            continue;
        }
        const double combined = std::hypot(binomial_se(*v, reps), binomial_se(c.value, reps));
        const double z = std::abs(*v - c.value) / combined;
        worst = std::max(worst, z);
        ++checked;
        if (z > 4.0)
            out.fail(fmt("table %d n=%s %s: %.5f vs published %g (%.1f SE)", c.table, c.row.c_str(),
                         c.column.c_str(), *v, c.value, z));
    }
    if (out.pass)
        out.detail = fmt("%d cells, largest deviation %.2f combined SE", checked, worst);
    return out;
}

Outcome acceptance_rates() {
    Outcome out;
    constexpr std::uint64_t reps = 100'000;
    double worst = 0.0;
    for (int n : kSizes)
        for (double theta : kThetas) {
            const ModelParams p{n, theta};
            const double lambda = LambdaTable(theta, n)[n];
            const auto feller = estimate(Statistic::single_cycle, p, Method::feller, reps, kSeed);
            const double se_f = binomial_se(lambda, static_cast<double>(feller.attempts));
            const double z_f = std::abs(feller.acceptance_rate() - lambda) / se_f;
            if (z_f > 3.0)
                out.fail(fmt("feller %s: %.5f vs lambda %.5f (%.1f sigma)", cell(n, theta).c_str(),
                             feller.acceptance_rate(), lambda, z_f));

            const double x = solve_tilt(theta).x(n);
            const double exact = poisson_acceptance_probability(p, x);
            const auto poisson = estimate(Statistic::single_cycle, p, Method::poisson, reps, kSeed);
            const double se_p = binomial_se(exact, static_cast<double>(poisson.attempts));
            const double z_p = std::abs(poisson.acceptance_rate() - exact) / se_p;
            if (z_p > 3.0)
                out.fail(fmt("poisson %s: %.5f vs exact %.5f (%.1f sigma)", cell(n, theta).c_str(),
                             poisson.acceptance_rate(), exact, z_p));
            worst = std::max({worst, z_f, z_p});
        }

    double worst_rel = 0.0;
    for (int n = 2; n <= 40; ++n)
        for (double theta : {0.1, 0.5, 1.0, 2.0, 5.0})
            for (double x : {1.0, solve_tilt(theta).x(n)}) {
                const double formula = poisson_acceptance_probability({n, theta}, x);
                const double dp = oracle::poisson_acceptance_dp({n, theta}, x);
                const double rel = std::abs(formula - dp) / dp;
                worst_rel = std::max(worst_rel, rel);
                if (rel > 1e-10)
                    out.fail(fmt("formula vs convolution %s x=%.6f: rel %.2e",
                                 cell(n, theta).c_str(), x, rel));
            }
    if (out.pass)
        out.detail = fmt("largest deviation %.2f sigma; formula vs DP rel %.1e", worst, worst_rel);
    return out;
}

Outcome appendix_theorems() {
    Outcome out;
    std::uint64_t comparisons = 0;
    for (int n = 5; n <= 14; ++n)
        for (double theta : kThetas) {
            const auto shift = oracle::verify_shift_ratio(n, theta);
            comparisons += shift.checked;
            if (!shift.ok())
                out.fail("shift ratio: " + shift.first_violation);
        }
    for (int n = 4; n <= 14; ++n) {
        const auto prop = oracle::verify_ratio_proposition(n, kThetas);
        comparisons += prop.checked;
        if (!prop.ok())
            out.fail("ratio proposition: " + prop.first_violation);
    }
    for (double theta : kThetas) {
        for (int n = 2; n <= 24; n += 2) {
            const auto par = oracle::parity_probabilities({n, theta});
            ++comparisons;
            if (!(par.all_odd < par.all_even))
                out.fail(fmt("alpha >= beta at %s", cell(n, theta).c_str()));
        }
        for (int n = 5; n <= 25; ++n) {
            const auto mono = oracle::monotone_probabilities({n, theta});
            ++comparisons;
            if (!(mono.decreasing > mono.increasing))
                out.fail(fmt("decreasing <= increasing at %s", cell(n, theta).c_str()));
        }
    }
    if (out.pass)
        out.detail = fmt("%llu exact comparisons", static_cast<unsigned long long>(comparisons));
    return out;
}

Outcome chain_timing() {
    Outcome out;
    const std::array<Method, 1> methods{Method::chain};
    const std::array<ModelParams, 2> grid{{{250, 0.5}, {250, 5.0}}};
    const auto cells = benchmark_methods(methods, grid, 100'000, kSeed, 7);
    const double spread = theta_spread(cells, Method::chain, 250);
    if (spread >= 0.2)
        out.fail(fmt("spread %.1f%%", 100.0 * spread));
    else
        out.detail = fmt("%.3g us vs %.3g us per sample, spread %.1f%%",
                         1e6 * cells[0].seconds_per_sample(), 1e6 * cells[1].seconds_per_sample(),
                         100.0 * spread);
    return out;
}

Outcome first_cycle_shape() {
    Outcome out;
    constexpr int n = 2000;
    constexpr std::uint64_t reps = 100'000;
    ChainSampler sampler({n, 1.0});
    RngStream rng(kSeed);
    std::vector<std::uint64_t> hits(n + 1, 0);
    std::vector<int> lengths;
    for (std::uint64_t i = 0; i < reps; ++i) {
        sampler.sample_lengths(rng, lengths);
        ++hits[static_cast<std::size_t>(lengths.front())];
    }
    // The empirical CDF of A_1/n is flat on [k/n, (k+1)/n).
    double ks = 0.0;
    std::uint64_t below = 0;
    for (int k = 0; k < n; ++k) {
        below += hits[static_cast<std::size_t>(k)];
        const double f = static_cast<double>(below) / static_cast<double>(reps);
        ks = std::max({ks, std::abs(f - static_cast<double>(k) / n),
                       std::abs(f - static_cast<double>(k + 1) / n)});
    }
    if (ks >= 0.02)
        out.fail(fmt("KS %.4f", ks));
    else
        out.detail = fmt("KS %.4f", ks);
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "lambda identities", 1.0, lambda_identities},
        {2, "OEIS A038205 cross-check", 1.0, oeis_cross_check},
        {3, "single-cycle exact values", 1.0, single_cycle_values},
        {4, "tilt solver", 1.0, tilt_solver},
        {5, "distinct-lengths limit", 1.0, distinct_limit},
        {6, "sampler equivalence at n=8", 60.0, sampler_equivalence},
        {7, "Monte Carlo tables 5, 6, 8, 9", 300.0, table_reproduction},
        {8, "acceptance-rate theory", 300.0, acceptance_rates},
        {9, "appendix theorems", 120.0, appendix_theorems},
        {10, "chain cost flat in theta", 120.0, chain_timing},
        {11, "first cycle shape", 60.0, first_cycle_shape},
    };
    int only = 0;
    if (argc > 1)
        only = std::atoi(argv[1]);
    if (argc > 2 || (argc > 1 && (only < 1 || only > static_cast<int>(criteria.size())))) {
        std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
        return 1;
    }

    bool all = true;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only)
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o = c.run();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= c.budget_seconds)
            o.fail(fmt("took %.1f s, budget %.0f s", secs, c.budget_seconds));
        all = all && o.pass;
        std::printf("%s %2d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
