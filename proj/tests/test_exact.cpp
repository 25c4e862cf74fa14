#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "derange/counting.hpp"
#include "derange/exact.hpp"

using namespace derange;
using doctest::Approx;

namespace {

// Rounds to the number of decimals a table prints.
bool rounds_to(double value, double printed, int decimals) {
    const double unit = std::pow(10.0, -decimals);
    return std::abs(value - printed) <= 0.5 * unit + 1e-12;
}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("rising factorial in log space") {
    CHECK(rising_factorial_log(1.0, 5).value == Approx(std::log(120.0)).epsilon(1e-14));
    CHECK(rising_factorial_log(3.7, 0).value == 0.0);
    CHECK(rising_factorial_log(0.5, 3).value == Approx(std::log(1.875)).epsilon(1e-14));
    CHECK_THROWS_AS(rising_factorial_log(1.0, -1), std::invalid_argument);
}

TEST_CASE("model parameters are validated") {
    CHECK_NOTHROW((ModelParams{2, 0.5}.validate()));
    CHECK_THROWS_AS((ModelParams{1, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{5, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{5, -2.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{5, INFINITY}.validate()), std::invalid_argument);
}

TEST_CASE("lambda table at theta = 1 is D_n / n!") {
    const LambdaTable t(1.0, 4);
    const std::vector<double> want{1.0, 0.0, 0.5, 1.0 / 3.0, 3.0 / 8.0};
    for (int i = 0; i <= 4; ++i)
        CHECK(t[i] == Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-15));
    CHECK(t.n_max() == 4);
    CHECK_THROWS_AS(t.at(5), std::out_of_range);
    CHECK_THROWS_AS(t.at(-1), std::out_of_range);
}

TEST_CASE("lambda_2 = 1/(1+theta)") {
    for (double th : {0.1, 0.5, 1.0, 3.0, 40.0})
        CHECK(LambdaTable(th, 2)[2] == Approx(1.0 / (1.0 + th)).epsilon(1e-15));
}

TEST_CASE("lambda table against tabulated acceptance theory") {
    CHECK(rounds_to(LambdaTable(0.5, 10)[10], 0.591, 3));
    CHECK(rounds_to(LambdaTable(5.0, 250)[250], 0.007, 3));
}

TEST_CASE("lambda entries stay in [0,1] and approach e^-theta") {
    for (double th : {0.1, 0.5, 2.0, 5.0}) {
        const LambdaTable t(th, 10000);
        for (double v : t.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const double limit = std::exp(-th);
        double prev = std::abs(t[50] - limit);
        bool shrinking = true;
        for (int n = 51; n <= 10000; ++n) {
            const double gap = std::abs(t[n] - limit);
            shrinking = shrinking && gap <= prev;
            prev = gap;
        }
        CHECK(shrinking);
        // n (λ_n - e^{-θ}) → θ(θ-1)e^{-θ}
        CHECK(10000.0 * (t[10000] - limit) == Approx(th * (th - 1.0) * limit).epsilon(2e-3));
    }
    CHECK(std::abs(LambdaTable(1.0, 1000)[1000] - std::exp(-1.0)) < 1e-15);
}

TEST_CASE("alternating sum cross-check") {
    CHECK(lambda_altsum(1.0, 4).value == Approx(0.375).epsilon(1e-14));
    CHECK(lambda_altsum(2.5, 1).value == 0.0);
    CHECK(rounds_to(lambda_altsum(1.0, 10).value, 0.368, 3));
    for (double th : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const LambdaTable t(th, 100);
        for (int n = 0; n <= 100; ++n) {
            const auto alt = lambda_altsum(th, n);
            if (alt.reliable)
                CHECK(rel_close(alt.value, t[n], 1e-9));
        }
    }
}

TEST_CASE("alternating sum flags catastrophic cancellation") {
    const auto alt = lambda_altsum(50.0, 1000);
    CHECK_FALSE(alt.reliable);
    CHECK(alt.cancellation > 1e12);
    CHECK(lambda_altsum(1.0, 20).reliable);
}

TEST_CASE("Stirling numbers of the first kind") {
    CHECK(stirling_first_unsigned(7, 7) == 1);
    CHECK(stirling_first_unsigned(4, 2) == 11);
    CHECK(stirling_first_unsigned(6, 0) == 0);
    CHECK(stirling_first_unsigned(0, 0) == 1);
    // Row sums are n!.
    BigInt sum = 0;
    for (int k = 0; k <= 10; ++k)
        sum += stirling_first_unsigned(10, k);
    CHECK(sum == 3628800);
}

TEST_CASE("derangements by number of cycles") {
    CHECK(derangement_cycle_count(2, 1) == 1);
    CHECK(derangement_cycle_count(4, 2) == 3);
    CHECK(derangement_cycle_count(4, 1) == 6);
    CHECK(derangement_cycle_count(6, 4) == 0);
    CHECK(derangement_cycle_count(6, 0) == 0);
    for (int n = 2; n <= 15; ++n) {
        BigInt total = 0;
        for (const auto& d : derangement_cycle_counts(n)) {
            CHECK(d >= 0);
            total += d;
        }
        CHECK(total == derangement_number(n));
    }
    CHECK(derangement_number(15) == BigInt("481066515734"));
    // D(250, k) needs arbitrary precision.
    CHECK(log_big(derangement_cycle_count(250, 5)) > 1000.0);
}

TEST_CASE("n! lambda_n(1) = D_n") {
    const LambdaTable t(1.0, 15);
    for (int n = 0; n <= 15; ++n)
        CHECK(BigInt(std::llround(t[n] * std::tgamma(n + 1.0))) == derangement_number(n));
}

TEST_CASE("sum_k theta^k D(n,k) = lambda_n theta_(n)") {
    for (double th : {0.5, 1.0, 5.0})
        for (int n = 2; n <= 15; ++n) {
            const auto d = derangement_cycle_counts(n);
            double lhs = 0.0;
            for (std::size_t k = 0; k < d.size(); ++k)
                lhs += std::pow(th, static_cast<double>(k)) * d[k].convert_to<double>();
            const double rhs = LambdaTable(th, n)[n] * rising_factorial_log(th, n).exp();
            CHECK(rel_close(lhs, rhs, 1e-12));
        }
}

TEST_CASE("cycle types") {
    const std::vector<int> lengths{3, 2, 3};
    const CycleType t = CycleType::from_lengths(8, lengths);
    CHECK(t.count(3) == 2);
    CHECK(t.count(2) == 1);
    CHECK(t.num_cycles() == 3);
    CHECK(t.valid());
    CHECK(t.to_string() == "(2,3,3)");
    CHECK(t.lengths_descending() == std::vector<int>{3, 3, 2});
    const std::vector<int> with_fixed_point{1, 3};
    CHECK_THROWS_AS(CycleType::from_lengths(4, with_fixed_point), std::invalid_argument);
    const std::vector<int> short_total{2, 2};
    CHECK_THROWS_AS(CycleType::from_lengths(5, short_total), std::invalid_argument);
    CycleType u(5);
    u.add_cycle(5);
    u.remove_cycle(5);
    CHECK(u.num_cycles() == 0);
    CHECK_THROWS_AS(u.remove_cycle(5), std::invalid_argument);
}

TEST_CASE("factorial moments") {
    CHECK(factorial_moment({10, 1.0}, {{11, 1}}) == 0.0);
    for (int n = 4; n <= 30; n += 3)
        CHECK(factorial_moment({n, 2.0}, {{n - 1, 1}}) == 0.0);
    // E C_2(6) over the 265 derangements of 6: 135 two-cycles in total.
    CHECK(factorial_moment({6, 1.0}, {{2, 1}}) == Approx(135.0 / 265.0).epsilon(1e-13));
    CHECK(factorial_moment({6, 1.0}, {}) == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("mean cycle counts") {
    for (int n = 3; n <= 40; ++n)
        CHECK(mean_cycle_count({n, 0.7}, n - 1) == 0.0);
    CHECK(mean_cycle_count({2, 3.0}, 2) == Approx(1.0).epsilon(1e-14));
    CHECK(mean_cycle_count({8, 2.0}, 3) == Approx(32.0 / 67.0).epsilon(1e-13));
    CHECK_THROWS(mean_cycle_count({8, 2.0}, 1));
}

TEST_CASE("cycle count laws") {
    for (double th : {0.5, 1.0, 5.0})
        for (int n = 2; n <= 12; ++n)
            for (int j = 2; j <= n; ++j) {
                double total = 0.0;
                for (int r = 0; r <= n / j; ++r) {
                    const double p = cycle_count_pmf({n, th}, j, r);
                    CHECK(p >= 0.0);
                    CHECK(p <= 1.0);
                    total += p;
                }
                CHECK(total == Approx(1.0).epsilon(1e-10));
            }
    // Derangements of 6 with no 2-cycle: 160 of 265.
    CHECK(cycle_count_pmf({6, 1.0}, 2, 0) == Approx(160.0 / 265.0).epsilon(1e-12));
    // Derangements of 5: 24 five-cycles and 20 of type (2,3).
    CHECK(cycle_count_pmf({5, 1.0}, 2, 1) == Approx(20.0 / 44.0).epsilon(1e-12));
    CHECK(cycle_count_pmf({5, 1.0}, 2, 2) == Approx(0.0));
    CHECK(cycle_count_pmf({5, 1.0}, 5, 1) == Approx(24.0 / 44.0).epsilon(1e-12));
}

TEST_CASE("number of cycles") {
    for (double th : {0.5, 1.0, 5.0})
        for (int n = 2; n <= 20; ++n) {
            const auto law = num_cycles_distribution({n, th});
            CHECK(law[0] == 0.0);
            CHECK(std::accumulate(law.begin(), law.end(), 0.0) == Approx(1.0).epsilon(1e-10));
        }
    CHECK(num_cycles_pmf({4, 1.0}, 2) == Approx(3.0 / 9.0).epsilon(1e-13));
    CHECK(num_cycles_pmf({5, 2.0}, 2) == Approx(5.0 / 8.0).epsilon(1e-13));
    CHECK(num_cycles_mean({2, 4.0}) == Approx(1.0).epsilon(1e-14));
    CHECK(num_cycles_mean({4, 1.0}) == Approx(4.0 / 3.0).epsilon(1e-13));

    const ModelParams p{50, 5.0};
    const auto law = num_cycles_distribution(p);
    double mean = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k)
        mean += static_cast<double>(k) * law[k];
    CHECK(rel_close(mean, num_cycles_mean(p), 1e-10));
}

TEST_CASE("single cycle probability") {
    CHECK(rounds_to(single_cycle_prob({10, 0.5}), 0.480, 3));
    CHECK(rounds_to(single_cycle_prob({10, 1.0}), 0.272, 3));
    CHECK(rounds_to(single_cycle_prob({10, 5.0}), 0.021, 3));
    CHECK(rounds_to(single_cycle_prob({50, 5.0}) * 1e5, 3.29, 2));
    CHECK(rounds_to(single_cycle_prob({250, 5.0}) * 1e8, 1.62, 2));
    CHECK(single_cycle_prob({4, 1.0}) == Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(single_cycle_prob({2, 0.3}) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("single cycle asymptotics") {
    CHECK(single_cycle_asymptotic({10, 1.0}) == Approx(std::exp(1.0) / 10.0).epsilon(1e-14));
    CHECK(rounds_to(single_cycle_asymptotic({50, 0.5}), 0.207, 3));
    CHECK(rounds_to(single_cycle_asymptotic({10, 5.0}), 0.178, 3));
}

TEST_CASE("first cycle survival") {
    for (int n : {2, 5, 12, 100}) {
        const ModelParams p{n, 1.7};
        CHECK(first_cycle_survival(p, 0) == Approx(1.0));
        CHECK(first_cycle_survival(p, 1) == Approx(1.0));
        CHECK(first_cycle_survival(p, n) == 0.0);
        for (int l = 1; l <= n; ++l)
            CHECK(first_cycle_survival(p, l) <= first_cycle_survival(p, l - 1) + 1e-15);
    }
    // Published simulation of E A_1(10) at θ = 1.
    CHECK(std::abs(first_cycle_mean({10, 1.0}) - 6.45) < 0.05);
    CHECK_THROWS(first_cycle_survival({10, 1.0}, 11));
}

TEST_CASE("distinct lengths limit") {
    CHECK(rounds_to(distinct_lengths_limit(0.5), 0.929, 3));
    CHECK(rounds_to(distinct_lengths_limit(1.0), 0.763, 3));
    CHECK(rounds_to(distinct_lengths_limit(5.0), 0.012, 3));
}
