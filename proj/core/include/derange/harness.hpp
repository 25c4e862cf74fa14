#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "derange/chain.hpp"
#include "derange/exact.hpp"

namespace derange {

enum class Statistic {
    single_cycle,
    distinct_lengths,
    all_odd,
    all_even,
    first_is_longest,
    mean_first_cycle,
    mean_longest_cycle,
    weakly_decreasing,
    weakly_increasing,
    num_cycles_mean,
};

std::string_view statistic_name(Statistic s);
/// Throws std::invalid_argument for unknown names.
Statistic parse_statistic(std::string_view name);
std::span<const Statistic> all_statistics();
/// True for 0/1 indicators, false for lengths and counts.
bool is_probability(Statistic s);

/// Value of a statistic on one sample's ordered cycle lengths.
double evaluate_statistic(Statistic s, std::span<const int> ordered_lengths);

/// 1 iff every cycle length occurs once.
int distinct_lengths_statistic(const DerangementSample& sample);

struct EstimateResult {
    std::string statistic;
    std::string method;
    double point = 0.0;
    /// sqrt(p(1-p)/reps) for probabilities, sample sd / sqrt(reps) otherwise.
    double std_error = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    /// Attempts used by the rejection samplers; equals reps for the chain.
    std::uint64_t attempts = 0;
    unsigned workers = 1;

    double acceptance_rate() const;
    /// Binomial standard error of the acceptance rate over all attempts.
    double acceptance_std_error() const;
};

struct EstimateOptions {
    /// Reps are split across this many workers, worker w drawing from RngStream(seed, stream_offset + w).
    unsigned workers = 1;
    std::uint64_t stream_offset = 0;
    /// Tilt the conditioned-Poisson sampler.
    bool tilted = true;
    /// Draw budget per worker for the whole batch.
    std::uint64_t draw_budget = kDefaultDrawBudget;
};

/// Monte Carlo estimates of several statistics from one shared set of samples.
/// Deterministic for fixed (seed, reps, workers, stream_offset). Throws
/// MaxAttemptsExceeded when a worker spends its draw budget.
std::vector<EstimateResult> estimate_many(std::span<const Statistic> statistics,
                                          const ModelParams& params, Method method,
                                          std::uint64_t reps, std::uint64_t seed,
                                          const EstimateOptions& options = {});

EstimateResult estimate(Statistic statistic, const ModelParams& params, Method method,
                        std::uint64_t reps, std::uint64_t seed, const EstimateOptions& options = {});

/// Exact value where one is available: single_cycle, mean_first_cycle and
/// num_cycles_mean for every n, the parity and monotone probabilities for n <= 1000.
std::optional<double> exact_statistic(Statistic s, const ModelParams& params);

struct BenchmarkCell {
    Method method = Method::chain;
    ModelParams params;
    std::uint64_t samples = 0;
    std::uint64_t attempts = 0;
    /// Fastest of the timed trials.
    double seconds = 0.0;

    double seconds_per_sample() const { return seconds / static_cast<double>(samples); }
    double attempts_per_sample() const {
        return static_cast<double>(attempts) / static_cast<double>(samples);
    }
};

/// Times `samples` accepted draws for every (method, params) pair, keeping the
/// fastest of `trials` runs. Each trial reuses the same seed.
std::vector<BenchmarkCell> benchmark_methods(std::span<const Method> methods,
                                             std::span<const ModelParams> grid,
                                             std::uint64_t samples, std::uint64_t seed,
                                             int trials = 3);

/// (max - min) / min of seconds per sample over the cells with this method and n.
double theta_spread(std::span<const BenchmarkCell> cells, Method method, int n);

// ---------------------------------------------------------------------------
// Tables

struct TableRow {
    std::string label;
    std::vector<std::optional<double>> values;

    friend bool operator==(const TableRow&, const TableRow&) = default;
};

/// A reproduced table: each row has a label (usually n) and numeric cells that may be blank.
struct Table {
    int id = 0;
    std::string title;
    std::string label_column = "n";
    /// Names of the numeric columns, in order.
    std::vector<std::string> columns;
    std::vector<TableRow> rows;

    /// Position in TableRow::values; throws std::out_of_range if the column is missing.
    std::size_t column_index(std::string_view name) const;
    std::optional<double> value(std::string_view row_label, std::string_view column) const;

    friend bool operator==(const Table&, const Table&) = default;
};

/// Table ids that reproduce_table accepts.
std::span<const int> table_ids();

struct TableOptions {
    std::uint64_t reps = 100'000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    /// Timing columns are wall-clock and vary between runs; without them the
    /// output is byte-identical for fixed (seed, reps, workers).
    bool timings = true;
};

/// Throws std::invalid_argument for an id outside table_ids().
Table reproduce_table(int id, const TableOptions& options);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

std::string to_csv(const Table& table);
std::string to_markdown(const Table& table);
std::string to_json(const Table& table);

/// Inverse of to_csv; id and title are not part of the CSV and stay default.
Table table_from_csv(std::string_view csv);
Table table_from_json(std::string_view json);

}  // namespace derange
