#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "derange/harness.hpp"

using namespace derange;
using doctest::Approx;

TEST_CASE("statistic names round-trip") {
    for (Statistic s : all_statistics())
        CHECK(parse_statistic(statistic_name(s)) == s);
    CHECK_THROWS_AS(parse_statistic("median"), std::invalid_argument);
    CHECK(is_probability(Statistic::all_odd));
    CHECK_FALSE(is_probability(Statistic::mean_first_cycle));
}

TEST_CASE("statistics on fixed samples") {
    const std::vector<int> a{2, 3};
    const std::vector<int> b{2, 2};
    const std::vector<int> c{5};
    const std::vector<int> d{3, 5, 3};
    CHECK(evaluate_statistic(Statistic::distinct_lengths, a) == 1.0);
    CHECK(evaluate_statistic(Statistic::distinct_lengths, b) == 0.0);
    CHECK(evaluate_statistic(Statistic::single_cycle, c) == 1.0);
    CHECK(evaluate_statistic(Statistic::single_cycle, a) == 0.0);
    CHECK(evaluate_statistic(Statistic::all_odd, d) == 1.0);
    CHECK(evaluate_statistic(Statistic::all_odd, a) == 0.0);
    CHECK(evaluate_statistic(Statistic::all_even, b) == 1.0);
    CHECK(evaluate_statistic(Statistic::first_is_longest, d) == 0.0);
    CHECK(evaluate_statistic(Statistic::first_is_longest, b) == 1.0);
    CHECK(evaluate_statistic(Statistic::mean_first_cycle, d) == 3.0);
    CHECK(evaluate_statistic(Statistic::mean_longest_cycle, d) == 5.0);
    CHECK(evaluate_statistic(Statistic::weakly_decreasing, b) == 1.0);
    CHECK(evaluate_statistic(Statistic::weakly_decreasing, a) == 0.0);
    CHECK(evaluate_statistic(Statistic::weakly_increasing, a) == 1.0);
    CHECK(evaluate_statistic(Statistic::num_cycles_mean, d) == 3.0);
    CHECK_THROWS(evaluate_statistic(Statistic::single_cycle, std::vector<int>{}));

    const std::vector<int> lengths{2, 3};
    DerangementSample s{CycleType::from_lengths(5, lengths), {lengths}, std::nullopt};
    CHECK(distinct_lengths_statistic(s) == 1);
    const std::vector<int> twice{2, 2};
    s.cycle_type = CycleType::from_lengths(4, twice);
    CHECK(distinct_lengths_statistic(s) == 0);
}

TEST_CASE("estimates are deterministic for fixed seed and workers") {
    const ModelParams p{30, 2.0};
    EstimateOptions opt;
    opt.workers = 3;
    const auto a = estimate(Statistic::all_odd, p, Method::chain, 3001, 9, opt);
    const auto b = estimate(Statistic::all_odd, p, Method::chain, 3001, 9, opt);
    CHECK(a.point == b.point);
    CHECK(a.attempts == b.attempts);
    CHECK(a.workers == 3);
    CHECK(a.reps == 3001);

    const auto c = estimate(Statistic::all_odd, p, Method::chain, 3001, 10, opt);
    CHECK(a.point != c.point);
}

TEST_CASE("one worker reproduces a direct sampling loop") {
    const ModelParams p{12, 0.5};
    auto sampler = make_sampler(Method::feller, p);
    RngStream rng(4, 0);
    std::vector<int> lengths;
    double sum = 0.0;
    std::uint64_t attempts = 0;
    for (int i = 0; i < 2000; ++i) {
        attempts += sampler->sample_lengths(rng, lengths);
        sum += lengths.front();
    }
    const auto e = estimate(Statistic::mean_first_cycle, p, Method::feller, 2000, 4);
    CHECK(e.point == Approx(sum / 2000.0).epsilon(1e-15));
    CHECK(e.attempts == attempts);
    CHECK(e.acceptance_rate() == Approx(2000.0 / static_cast<double>(attempts)));
    CHECK(e.acceptance_std_error() > 0.0);
}

TEST_CASE("estimates agree with exact values") {
    const ModelParams p{20, 1.0};
    const std::vector<Statistic> stats{Statistic::single_cycle, Statistic::all_even,
                                       Statistic::weakly_decreasing, Statistic::num_cycles_mean,
                                       Statistic::mean_first_cycle};
    for (Method m : {Method::chain, Method::feller, Method::poisson}) {
        const auto results = estimate_many(stats, p, m, 40000, 21);
        for (std::size_t i = 0; i < stats.size(); ++i) {
            const auto exact = exact_statistic(stats[i], p);
            REQUIRE(exact.has_value());
            INFO(results[i].method, " ", results[i].statistic);
            CHECK(std::abs(results[i].point - *exact) < 4.0 * results[i].std_error + 1e-12);
        }
    }
    CHECK_FALSE(exact_statistic(Statistic::distinct_lengths, p).has_value());
    CHECK_FALSE(exact_statistic(Statistic::all_odd, {2000, 1.0}).has_value());
}

TEST_CASE("rejection acceptance rate tracks lambda") {
    const ModelParams p{50, 5.0};
    const auto e = estimate(Statistic::single_cycle, p, Method::feller, 2000, 3);
    const double lambda = LambdaTable(5.0, 50)[50];
    CHECK(std::abs(e.acceptance_rate() - lambda) < 4.0 * e.acceptance_std_error());
}

TEST_CASE("estimate argument checks") {
    CHECK_THROWS_AS(estimate(Statistic::single_cycle, {10, 1.0}, Method::chain, 0, 1),
                    std::invalid_argument);
    EstimateOptions opt;
    opt.workers = 0;
    CHECK_THROWS_AS(estimate(Statistic::single_cycle, {10, 1.0}, Method::chain, 10, 1, opt),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate(Statistic::single_cycle, {1, 1.0}, Method::chain, 10, 1),
                    std::invalid_argument);
    opt.workers = 1;
    opt.draw_budget = 100;
    CHECK_THROWS_AS(estimate(Statistic::single_cycle, {300, 9.0}, Method::feller, 1000, 1, opt),
                    MaxAttemptsExceeded);
}

TEST_CASE("benchmark cells") {
    const std::vector<Method> methods{Method::chain, Method::feller};
    const std::vector<ModelParams> grid{{20, 0.5}, {20, 5.0}};
    const auto cells = benchmark_methods(methods, grid, 200, 1, 2);
    REQUIRE(cells.size() == 4);
    for (const auto& c : cells) {
        CHECK(c.seconds > 0.0);
        CHECK(c.samples == 200);
        CHECK(c.attempts_per_sample() >= 1.0);
    }
    CHECK(cells[0].attempts_per_sample() == 1.0);
    CHECK(theta_spread(cells, Method::chain, 20) >= 0.0);
    CHECK_THROWS(theta_spread(cells, Method::poisson, 20));
}

TEST_CASE("table ids") {
    const auto ids = table_ids();
    CHECK(std::vector<int>(ids.begin(), ids.end()) == std::vector<int>{1, 2, 3, 4, 5, 6, 8, 9});
    TableOptions opt;
    opt.reps = 10;
    CHECK_THROWS_AS(reproduce_table(7, opt), std::invalid_argument);
    CHECK_THROWS_AS(reproduce_table(0, opt), std::invalid_argument);
}

TEST_CASE("table output is deterministic without timings") {
    TableOptions opt;
    opt.reps = 500;
    opt.seed = 5;
    opt.timings = false;
    const Table a = reproduce_table(4, opt);
    const Table b = reproduce_table(4, opt);
    CHECK(to_csv(a) == to_csv(b));
    CHECK(to_json(a) == to_json(b));
    CHECK(a.rows.size() == 3);
    CHECK(a.value("10", "theta=1 exact") == Approx(single_cycle_prob({10, 1.0})));
}

TEST_CASE("simulated cells with an exact counterpart lie within 4 SE") {
    TableOptions opt;
    opt.reps = 100'000;
    opt.seed = 8;
    opt.timings = false;
    const double reps = static_cast<double>(opt.reps);
    auto se = [](double p, double count) {
        const double q = std::max(p, 1.0 / count);
        return std::sqrt(q * (1.0 - q) / count);
    };
    // Acceptance rates: attempts = reps / rate.
    const std::vector<std::pair<int, std::string>> rates{{1, "theory"}, {2, "exact"}};
    for (const auto& [id, reference] : rates) {
        const Table t = reproduce_table(id, opt);
        for (const auto& row : t.rows)
            for (const char* th : {"0.5", "1", "5"}) {
                const std::string prefix = std::string("theta=") + th + " ";
                const double rate = *t.value(row.label, prefix + "accept rate");
                const double want = *t.value(row.label, prefix + reference);
                INFO("table ", id, " n=", row.label, " theta=", th);
                CHECK(std::abs(rate - want) < 4.0 * se(want, reps / rate));
            }
    }
    const Table four = reproduce_table(4, opt);
    for (const auto& row : four.rows)
        for (const char* th : {"0.5", "1", "5"}) {
            const std::string prefix = std::string("theta=") + th + " ";
            const double sim = *four.value(row.label, prefix + "sim");
            const double want = *four.value(row.label, prefix + "exact");
            INFO("table 4 n=", row.label, " theta=", th);
            CHECK(std::abs(sim - want) < 4.0 * se(want, reps));
        }
}

TEST_CASE("table round trip through CSV and JSON") {
    TableOptions opt;
    opt.reps = 300;
    opt.seed = 2;
    opt.timings = false;
    for (int id : {1, 5, 6}) {
        const Table t = reproduce_table(id, opt);
        const Table from_json = table_from_json(to_json(t));
        CHECK(from_json == t);
        Table from_csv = table_from_csv(to_csv(t));
        from_csv.id = t.id;
        from_csv.title = t.title;
        CHECK(from_csv == t);
    }
    const Table six = reproduce_table(6, opt);
    CHECK_FALSE(six.value("11", "theta=1 beta").has_value());
    CHECK(six.value("10", "theta=1 beta").has_value());
    CHECK_THROWS_AS(six.column_index("gamma"), std::out_of_range);
}

TEST_CASE("table 5 has the limit row") {
    TableOptions opt;
    opt.reps = 200;
    opt.timings = false;
    const Table t = reproduce_table(5, opt);
    REQUIRE(t.rows.back().label == "inf");
    CHECK(t.value("inf", "theta=1 distinct") == Approx(distinct_lengths_limit(1.0)));
}

TEST_CASE("markdown output") {
    Table t;
    t.columns = {"a", "b"};
    t.rows.push_back({"10", {0.5, std::nullopt}});
    const std::string md = to_markdown(t);
    CHECK(md.find("| n | a | b |") != std::string::npos);
    CHECK(md.find("| 10 | 0.5 |  |") != std::string::npos);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
