#include <vector>

#include <benchmark/benchmark.h>

#include "derange/chain.hpp"
#include "derange/exact.hpp"
#include "derange/oracle.hpp"

using namespace derange;

namespace {

// Arguments are (n, 10·θ) so that θ = 0.5 fits an integer range.
ModelParams params_of(const benchmark::State& state) {
    return {static_cast<int>(state.range(0)), static_cast<double>(state.range(1)) / 10.0};
}

void grid(benchmark::internal::Benchmark* b) {
    for (int n : {10, 50, 250})
        for (int theta10 : {5, 10, 50})
            b->Args({n, theta10});
}

void run_sampler(benchmark::State& state, Method method) {
    const ModelParams p = params_of(state);
    auto sampler = make_sampler(method, p);
    sampler->set_draw_budget(~std::uint64_t{0});
    RngStream rng(1);
    std::vector<int> lengths;
    std::uint64_t attempts = 0;
    for (auto _ : state) {
        attempts += sampler->sample_lengths(rng, lengths);
        benchmark::DoNotOptimize(lengths.data());
    }
    state.counters["attempts/sample"] =
        benchmark::Counter(static_cast<double>(attempts) / static_cast<double>(state.iterations()));
}

void BM_chain(benchmark::State& state) { run_sampler(state, Method::chain); }
void BM_feller(benchmark::State& state) { run_sampler(state, Method::feller); }
void BM_poisson(benchmark::State& state) { run_sampler(state, Method::poisson); }

void BM_poisson_untilted(benchmark::State& state) {
    const ModelParams p = params_of(state);
    auto sampler = make_sampler(Method::poisson, p, false);
    sampler->set_draw_budget(~std::uint64_t{0});
    RngStream rng(1);
    std::vector<int> lengths;
    for (auto _ : state) {
        sampler->sample_lengths(rng, lengths);
        benchmark::DoNotOptimize(lengths.data());
    }
}

void BM_chain_construction(benchmark::State& state) {
    const ModelParams p = params_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(EtaChain(p));
}

void BM_lambda_table(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(LambdaTable(2.0, n));
    state.SetComplexityN(n);
}

void BM_cycle_count_pmf(benchmark::State& state) {
    const ModelParams p{static_cast<int>(state.range(0)), 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(cycle_count_distribution(p, 3));
}

void BM_parity_dp(benchmark::State& state) {
    const ModelParams p{static_cast<int>(state.range(0)), 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(oracle::parity_probabilities_dp(p));
}

void BM_realize_permutation(benchmark::State& state) {
    const ModelParams p{static_cast<int>(state.range(0)), 1.0};
    ChainSampler sampler(p);
    RngStream rng(1);
    std::vector<int> lengths;
    sampler.sample_lengths(rng, lengths);
    const OrderedCycleLengths ordered{lengths};
    for (auto _ : state)
        benchmark::DoNotOptimize(realize_permutation(ordered, rng));
}

}  // namespace

BENCHMARK(BM_chain)->Apply(grid);
BENCHMARK(BM_feller)->Apply(grid);
BENCHMARK(BM_poisson)->Apply(grid);
BENCHMARK(BM_poisson_untilted)->Apply(grid);
BENCHMARK(BM_chain_construction)->Args({250, 10})->Args({2000, 10});
BENCHMARK(BM_lambda_table)->RangeMultiplier(10)->Range(10, 100000)->Complexity(benchmark::oN);
BENCHMARK(BM_cycle_count_pmf)->Arg(50)->Arg(250);
BENCHMARK(BM_parity_dp)->Arg(50)->Arg(250);
BENCHMARK(BM_realize_permutation)->Arg(250)->Arg(2000);

BENCHMARK_MAIN();
