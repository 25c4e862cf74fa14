#include "derange/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "derange/oracle.hpp"

namespace derange {

namespace {

struct StatisticInfo {
    Statistic id;
    std::string_view name;
    bool probability;
};

constexpr std::array<StatisticInfo, 10> kStatistics{{
    {Statistic::single_cycle, "single_cycle", true},
    {Statistic::distinct_lengths, "distinct_lengths", true},
    {Statistic::all_odd, "all_odd", true},
    {Statistic::all_even, "all_even", true},
    {Statistic::first_is_longest, "first_is_longest", true},
    {Statistic::mean_first_cycle, "mean_first_cycle", false},
    {Statistic::mean_longest_cycle, "mean_longest_cycle", false},
    {Statistic::weakly_decreasing, "weakly_decreasing", true},
    {Statistic::weakly_increasing, "weakly_increasing", true},
    {Statistic::num_cycles_mean, "num_cycles_mean", false},
}};

constexpr std::array<Statistic, 10> kStatisticIds{
    Statistic::single_cycle,     Statistic::distinct_lengths,   Statistic::all_odd,
    Statistic::all_even,         Statistic::first_is_longest,   Statistic::mean_first_cycle,
    Statistic::mean_longest_cycle, Statistic::weakly_decreasing, Statistic::weakly_increasing,
    Statistic::num_cycles_mean,
};

const StatisticInfo& info(Statistic s) {
    for (const auto& i : kStatistics)
        if (i.id == s)
            return i;
    throw std::invalid_argument("unknown statistic");
}

bool all_distinct(std::span<const int> lengths) {
    thread_local std::vector<int> scratch;
    scratch.assign(lengths.begin(), lengths.end());
    std::sort(scratch.begin(), scratch.end());
    return std::adjacent_find(scratch.begin(), scratch.end()) == scratch.end();
}

struct PartialSums {
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::uint64_t attempts = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view statistic_name(Statistic s) { return info(s).name; }

Statistic parse_statistic(std::string_view name) {
    for (const auto& i : kStatistics)
        if (i.name == name)
            return i.id;
    throw std::invalid_argument("unknown statistic '" + std::string(name) + "'");
}

std::span<const Statistic> all_statistics() { return kStatisticIds; }

bool is_probability(Statistic s) { return info(s).probability; }

double evaluate_statistic(Statistic s, std::span<const int> lengths) {
    if (lengths.empty())
        throw std::invalid_argument("evaluate_statistic: empty sample");
    switch (s) {
    case Statistic::single_cycle:
        return lengths.size() == 1 ? 1.0 : 0.0;
    case Statistic::distinct_lengths:
        return all_distinct(lengths) ? 1.0 : 0.0;
    case Statistic::all_odd:
        return std::all_of(lengths.begin(), lengths.end(), [](int a) { return a % 2 == 1; }) ? 1.0
                                                                                          : 0.0;
    case Statistic::all_even:
        return std::all_of(lengths.begin(), lengths.end(), [](int a) { return a % 2 == 0; }) ? 1.0
                                                                                          : 0.0;
    case Statistic::first_is_longest:
        return lengths.front() == *std::max_element(lengths.begin(), lengths.end()) ? 1.0 : 0.0;
    case Statistic::mean_first_cycle:
        return lengths.front();
    case Statistic::mean_longest_cycle:
        return *std::max_element(lengths.begin(), lengths.end());
    case Statistic::weakly_decreasing:
        return std::is_sorted(lengths.begin(), lengths.end(), std::greater<>()) ? 1.0 : 0.0;
    case Statistic::weakly_increasing:
        return std::is_sorted(lengths.begin(), lengths.end()) ? 1.0 : 0.0;
    case Statistic::num_cycles_mean:
        return static_cast<double>(lengths.size());
    }
    throw std::invalid_argument("unknown statistic");
}

int distinct_lengths_statistic(const DerangementSample& sample) {
    const auto counts = sample.cycle_type.counts();
    return std::all_of(counts.begin(), counts.end(), [](int c) { return c <= 1; }) ? 1 : 0;
}

double EstimateResult::acceptance_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(reps) / static_cast<double>(attempts);
}

double EstimateResult::acceptance_std_error() const {
    if (attempts == 0)
        return 0.0;
    const double p = acceptance_rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(attempts));
}

std::vector<EstimateResult> estimate_many(std::span<const Statistic> statistics,
                                          const ModelParams& params, Method method,
                                          std::uint64_t reps, std::uint64_t seed,
                                          const EstimateOptions& options) {
    params.validate();
    if (reps == 0)
        throw std::invalid_argument("estimate: reps must be positive");
    if (options.workers == 0)
        throw std::invalid_argument("estimate: workers must be positive");
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(options.workers, reps));
    const std::size_t m = statistics.size();

    std::vector<PartialSums> partial(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](unsigned w) {
        try {
            auto sampler = make_sampler(method, params, options.tilted);
            sampler->set_draw_budget(options.draw_budget);
            RngStream rng(seed, options.stream_offset + w);
            const std::uint64_t share = reps / workers + (w < reps % workers ? 1 : 0);
            PartialSums& out = partial[w];
            out.sum.assign(m, 0.0);
            out.sum_sq.assign(m, 0.0);
            std::vector<int> lengths;
            lengths.reserve(static_cast<std::size_t>(params.n));
            for (std::uint64_t i = 0; i < share; ++i) {
                out.attempts += sampler->sample_lengths(rng, lengths);
                for (std::size_t s = 0; s < m; ++s) {
                    const double v = evaluate_statistic(statistics[s], lengths);
                    out.sum[s] += v;
                    out.sum_sq[s] += v * v;
                }
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    const auto t0 = std::chrono::steady_clock::now();
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            threads.emplace_back(run, w);
        for (auto& t : threads)
            t.join();
    }
    const double wall = seconds_since(t0);
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::uint64_t attempts = 0;
    std::vector<double> sum(m, 0.0), sum_sq(m, 0.0);
    for (const auto& p : partial) {
        attempts += p.attempts;
        for (std::size_t s = 0; s < m; ++s) {
            sum[s] += p.sum[s];
            sum_sq[s] += p.sum_sq[s];
        }
    }

    const auto r = static_cast<double>(reps);
    std::vector<EstimateResult> out;
    out.reserve(m);
    for (std::size_t s = 0; s < m; ++s) {
        EstimateResult e;
        e.statistic = std::string(statistic_name(statistics[s]));
        e.method = std::string(method_name(method));
        e.point = sum[s] / r;
        if (is_probability(statistics[s])) {
            e.std_error = std::sqrt(e.point * (1.0 - e.point) / r);
        } else {
            const double var = reps > 1 ? std::max(0.0, (sum_sq[s] - r * e.point * e.point) / (r - 1.0))
                                        : 0.0;
            e.std_error = std::sqrt(var / r);
        }
        e.reps = reps;
        e.seed = seed;
        e.wall_seconds = wall;
        e.attempts = attempts;
        e.workers = workers;
        out.push_back(std::move(e));
    }
    return out;
}

EstimateResult estimate(Statistic statistic, const ModelParams& params, Method method,
                        std::uint64_t reps, std::uint64_t seed, const EstimateOptions& options) {
    const std::array<Statistic, 1> one{statistic};
    return estimate_many(one, params, method, reps, seed, options).front();
}

std::optional<double> exact_statistic(Statistic s, const ModelParams& params) {
    params.validate();
    const bool dp_ok = params.n <= oracle::kMaxCompositionDpN;
    switch (s) {
    case Statistic::single_cycle:
        return single_cycle_prob(params);
    case Statistic::mean_first_cycle:
        return first_cycle_mean(params);
    case Statistic::num_cycles_mean:
        return num_cycles_mean(params);
    case Statistic::all_odd:
        if (dp_ok)
            return oracle::parity_probabilities(params).all_odd;
        break;
    case Statistic::all_even:
        if (dp_ok)
            return oracle::parity_probabilities(params).all_even;
        break;
    case Statistic::weakly_decreasing:
        if (dp_ok)
            return oracle::monotone_probabilities(params).decreasing;
        break;
    case Statistic::weakly_increasing:
        if (dp_ok)
            return oracle::monotone_probabilities(params).increasing;
        break;
    default:
        break;
    }
    return std::nullopt;
}

std::vector<BenchmarkCell> benchmark_methods(std::span<const Method> methods,
                                             std::span<const ModelParams> grid,
                                             std::uint64_t samples, std::uint64_t seed,
                                             int trials) {
    if (samples == 0 || trials < 1)
        throw std::invalid_argument("benchmark_methods: samples and trials must be positive");
    std::vector<BenchmarkCell> cells;
    std::vector<int> lengths;
    for (Method method : methods) {
        for (const auto& params : grid) {
            BenchmarkCell cell{method, params, samples, 0, std::numeric_limits<double>::infinity()};
            for (int t = 0; t < trials; ++t) {
                auto sampler = make_sampler(method, params);
                sampler->set_draw_budget(std::numeric_limits<std::uint64_t>::max());
                RngStream rng(seed);
                std::uint64_t attempts = 0;
                const auto t0 = std::chrono::steady_clock::now();
                for (std::uint64_t i = 0; i < samples; ++i)
                    attempts += sampler->sample_lengths(rng, lengths);
                cell.seconds = std::min(cell.seconds, seconds_since(t0));
                cell.attempts = attempts;
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

double theta_spread(std::span<const BenchmarkCell> cells, Method method, int n) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& c : cells) {
        if (c.method != method || c.params.n != n)
            continue;
        lo = std::min(lo, c.seconds_per_sample());
        hi = std::max(hi, c.seconds_per_sample());
    }
    if (!(hi > 0.0))
        throw std::invalid_argument("theta_spread: no matching cells");
    return (hi - lo) / lo;
}

}  // namespace derange
