#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "derange/chain.hpp"
#include "derange/exact.hpp"
#include "derange/harness.hpp"
#include "derange/oracle.hpp"

using namespace derange;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kVerifyFailed = 2, kMaxAttempts = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    const char* env = std::getenv("DERANGE_SEED");
    if (env == nullptr || *env == '\0')
        return 0;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used != std::string(env).size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError("DERANGE_SEED must be a non-negative integer, got '" + std::string(env) + "'");
    }
}

std::string fmt15(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string join(const std::vector<int>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

struct Common {
    int n = 0;
    double theta = 0.0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    void add_model(CLI::App* app) {
        app->add_option("--n", n, "Derangement size")->required();
        app->add_option("--theta", theta, "Bias parameter")->required();
    }
    void add_seed(CLI::App* app) {
        app->add_option("--seed", seed, "RNG seed (default: $DERANGE_SEED, else 0)")
            ->each([this](const std::string&) { seed_given = true; });
    }
    ModelParams params() const {
        ModelParams p{n, theta};
        p.validate();
        return p;
    }
    std::uint64_t resolved_seed() const { return seed_given ? seed : default_seed(); }
};

// ---------------------------------------------------------------------------

void run_exact_lambda(const Common& c, const std::string& method) {
    if (c.n < 0)
        throw UsageError("--n must be non-negative");
    if (!(c.theta > 0.0))
        throw UsageError("--theta must be positive");
    if (method == "recurrence") {
        std::cout << fmt15(LambdaTable(c.theta, c.n)[c.n]) << '\n';
        return;
    }
    const auto alt = lambda_altsum(c.theta, c.n);
    if (!alt.reliable)
        std::cerr << "warning: alternating sum lost precision (cancellation factor "
                  << alt.cancellation << "); use --method recurrence\n";
    std::cout << fmt15(alt.value) << '\n';
}

void run_exact_pmf(const Common& c, const std::string& what, int j, int r, bool j_given,
                   bool r_given) {
    const ModelParams p = c.params();
    if (what == "single-cycle") {
        std::cout << fmt15(single_cycle_prob(p)) << '\n';
        return;
    }
    if (what == "num-cycles") {
        if (r_given) {
            if (r < 1 || r > p.n / 2)
                throw UsageError("--r (number of cycles) must be in 1..floor(n/2)");
            std::cout << fmt15(num_cycles_pmf(p, r)) << '\n';
            return;
        }
        const auto law = num_cycles_distribution(p);
        for (std::size_t k = 1; k < law.size(); ++k)
            std::cout << k << ' ' << fmt15(law[k]) << '\n';
        return;
    }
    if (!j_given)
        throw UsageError("--what cycle-count needs --j");
    if (j < 2 || j > p.n)
        throw UsageError("--j must be in 2..n");
    if (r_given) {
        if (r < 0 || r > p.n / j)
            throw UsageError("--r must be in 0..floor(n/j)");
        std::cout << fmt15(cycle_count_pmf(p, j, r)) << '\n';
        return;
    }
    const auto law = cycle_count_distribution(p, j);
    for (std::size_t k = 0; k < law.size(); ++k)
        std::cout << k << ' ' << fmt15(law[k]) << '\n';
}

void run_sample(const Common& c, const std::string& method, std::uint64_t reps,
                const std::string& emit, const std::string& format, bool untilted,
                std::uint64_t max_draws) {
    const ModelParams p = c.params();
    auto sampler = make_sampler(parse_method(method), p, !untilted);
    sampler->set_draw_budget(max_draws);
    RngStream rng(c.resolved_seed());
    const bool csv = format == "csv";
    const bool perm = emit == "permutation";

    if (csv) {
        if (emit == "counts") {
            for (int j = 2; j <= p.n; ++j)
                std::cout << (j > 2 ? "," : "") << "c_" << j;
            std::cout << '\n';
        } else {
            std::cout << "index,lengths" << (perm ? ",perm" : "") << '\n';
        }
    }
    for (std::uint64_t i = 0; i < reps; ++i) {
        const SampleOutcome out = sampler->sample(rng, perm);
        const auto& lengths = out.sample.ordered_lengths.values;
        if (csv) {
            if (emit == "counts") {
                for (int j = 2; j <= p.n; ++j)
                    std::cout << (j > 2 ? "," : "") << out.sample.cycle_type.count(j);
            } else {
                std::cout << i << ',' << join(lengths, ' ');
                if (perm)
                    std::cout << ',' << join(*out.sample.permutation, ' ');
            }
            std::cout << '\n';
            continue;
        }
        nlohmann::json j;
        if (emit == "counts") {
            nlohmann::json counts = nlohmann::json::object();
            for (int len = 2; len <= p.n; ++len)
                if (out.sample.cycle_type.count(len) > 0)
                    counts[std::to_string(len)] = out.sample.cycle_type.count(len);
            j["counts"] = counts;
        } else {
            j["lengths"] = lengths;
            if (perm)
                j["perm"] = *out.sample.permutation;
        }
        std::cout << j.dump() << '\n';
    }
}

void run_estimate(const Common& c, const std::string& stat, const std::string& method,
                  std::uint64_t reps, unsigned workers, bool untilted, std::uint64_t max_draws) {
    const ModelParams p = c.params();
    if (reps == 0)
        throw UsageError("--reps must be positive");
    const Statistic s = parse_statistic(stat);
    EstimateOptions opt;
    opt.workers = workers;
    opt.tilted = !untilted;
    opt.draw_budget = max_draws;
    const EstimateResult r = estimate(s, p, parse_method(method), reps, c.resolved_seed(), opt);
    nlohmann::json j{{"statistic", r.statistic},
                     {"method", r.method},
                     {"n", p.n},
                     {"theta", p.theta},
                     {"point", r.point},
                     {"std_error", r.std_error},
                     {"reps", r.reps},
                     {"seed", r.seed},
                     {"workers", r.workers},
                     {"attempts", r.attempts},
                     {"acceptance_rate", r.acceptance_rate()},
                     {"wall_seconds", r.wall_seconds}};
    if (const auto exact = exact_statistic(s, p))
        j["exact"] = *exact;
    std::cout << j.dump(2) << '\n';
}

void run_table(int id, std::uint64_t reps, const Common& c, const std::string& format,
               unsigned workers, bool no_timing) {
    TableOptions opt;
    opt.reps = reps;
    opt.seed = c.resolved_seed();
    opt.workers = workers;
    opt.timings = !no_timing;
    const Table t = reproduce_table(id, opt);
    if (format == "csv")
        std::cout << to_csv(t);
    else if (format == "md")
        std::cout << to_markdown(t);
    else
        std::cout << to_json(t);
}

int run_verify(int max_n, const std::vector<double>& thetas) {
    oracle::VerifyOptions opt;
    opt.max_n = max_n;
    if (!thetas.empty())
        opt.thetas = thetas;
    const auto reports = oracle::verify_all(opt);
    std::uint64_t violations = 0;
    for (const auto& r : reports) {
        std::cout << (r.ok() ? "PASS " : "FAIL ") << r.name << ": " << r.checked << " checks, "
                  << r.violations << " violations, max error " << r.max_error << '\n';
        if (!r.ok())
            std::cout << "  first violation: " << r.first_violation << '\n';
        violations += r.violations;
    }
    return violations == 0 ? kOk : kVerifyFailed;
}

void run_bench(const std::vector<int>& ns, const std::vector<double>& thetas,
               const std::vector<std::string>& methods, std::uint64_t samples, int trials,
               const Common& c) {
    std::vector<Method> ms;
    for (const auto& m : methods)
        ms.push_back(parse_method(m));
    std::vector<ModelParams> grid;
    for (int n : ns)
        for (double th : thetas) {
            ModelParams p{n, th};
            p.validate();
            grid.push_back(p);
        }
    const auto cells = benchmark_methods(ms, grid, samples, c.resolved_seed(), trials);
    std::cout << "method,n,theta,samples,attempts_per_sample,seconds_per_sample\n";
    for (const auto& cell : cells)
        std::cout << method_name(cell.method) << ',' << cell.params.n << ',' << cell.params.theta
                  << ',' << cell.samples << ',' << cell.attempts_per_sample() << ','
                  << cell.seconds_per_sample() << '\n';
    for (Method m : ms)
        for (int n : ns)
            if (thetas.size() > 1)
                std::cerr << method_name(m) << " n=" << n << " theta spread "
                          << theta_spread(cells, m, n) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact computation and sampling of theta-biased derangements"};
    app.require_subcommand(1);

    Common common;

    // exact
    auto* exact = app.add_subcommand("exact", "Closed-form quantities");
    exact->require_subcommand(1);
    auto* lambda = exact->add_subcommand("lambda", "P(no fixed point) lambda_n(theta)");
    std::string lambda_method = "recurrence";
    lambda->add_option("--n", common.n, "Permutation size")->required();
    lambda->add_option("--theta", common.theta, "Bias parameter")->required();
    lambda->add_option("--method", lambda_method)->check(CLI::IsMember({"recurrence", "altsum"}));

    auto* pmf = exact->add_subcommand("pmf", "Cycle-count laws");
    std::string what;
    int j = 0, r = 0;
    pmf->add_option("--what", what)
        ->required()
        ->check(CLI::IsMember({"cycle-count", "num-cycles", "single-cycle"}));
    common.add_model(pmf);
    auto* j_opt = pmf->add_option("--j", j, "Cycle length (cycle-count)");
    auto* r_opt = pmf->add_option("--r", r, "Count value; number of cycles k for num-cycles");

    // sample
    auto* sample = app.add_subcommand("sample", "Draw derangements");
    std::string method = "chain", emit = "lengths", format = "jsonl";
    std::uint64_t reps = 1;
    std::uint64_t max_draws = kDefaultDrawBudget;
    bool untilted = false;
    sample->add_option("--method", method)->check(CLI::IsMember({"chain", "feller", "poisson"}));
    common.add_model(sample);
    sample->add_option("--reps", reps, "Number of samples");
    common.add_seed(sample);
    sample->add_option("--emit", emit)->check(CLI::IsMember({"lengths", "counts", "permutation"}));
    sample->add_option("--format", format)->check(CLI::IsMember({"jsonl", "csv"}));
    sample->add_flag("--untilted", untilted, "Poisson method without the tilt x");
    sample->add_option("--max-draws", max_draws, "Draw budget for the whole batch");

    // estimate
    auto* est = app.add_subcommand("estimate", "Monte Carlo estimate of one statistic");
    std::string stat;
    unsigned workers = 1;
    std::uint64_t est_reps = 100'000;
    std::vector<std::string> stat_names;
    for (Statistic s : all_statistics())
        stat_names.emplace_back(statistic_name(s));
    est->add_option("--stat", stat)->required()->check(CLI::IsMember(stat_names));
    est->add_option("--method", method)->check(CLI::IsMember({"chain", "feller", "poisson"}));
    common.add_model(est);
    est->add_option("--reps", est_reps);
    common.add_seed(est);
    est->add_option("--workers", workers)->check(CLI::Range(1u, 1024u));
    est->add_flag("--untilted", untilted);
    est->add_option("--max-draws", max_draws, "Draw budget per worker");

    // table
    auto* table = app.add_subcommand("table", "Reproduce a published table");
    int table_id = 0;
    std::uint64_t table_reps = 100'000;
    std::string table_format = "csv";
    bool no_timing = false;
    table->add_option("--id", table_id)->required();
    table->add_option("--reps", table_reps);
    common.add_seed(table);
    table->add_option("--format", table_format)->check(CLI::IsMember({"csv", "md", "json"}));
    table->add_option("--workers", workers)->check(CLI::Range(1u, 64u));
    table->add_flag("--no-timing", no_timing, "Drop wall-clock columns");

    // verify
    auto* verify = app.add_subcommand("verify", "Run the exhaustive oracle suite");
    int max_n = 14;
    std::vector<double> theta_list;
    verify->add_option("--max-n", max_n)->check(CLI::Range(2, 20));
    verify->add_option("--theta-list", theta_list)->check(CLI::PositiveNumber);

    // bench
    auto* bench = app.add_subcommand("bench", "Time the samplers across a grid");
    std::vector<int> n_list{10, 50, 250};
    std::vector<double> bench_thetas{0.5, 1.0, 5.0};
    std::vector<std::string> methods{"chain", "feller", "poisson"};
    std::uint64_t samples = 10'000;
    int trials = 3;
    bench->add_option("--n-list", n_list);
    bench->add_option("--theta-list", bench_thetas)->check(CLI::PositiveNumber);
    bench->add_option("--methods", methods)->check(CLI::IsMember({"chain", "feller", "poisson"}));
    bench->add_option("--samples", samples);
    bench->add_option("--trials", trials)->check(CLI::Range(1, 100));
    common.add_seed(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*lambda)
            run_exact_lambda(common, lambda_method);
        else if (*pmf)
            run_exact_pmf(common, what, j, r, j_opt->count() > 0, r_opt->count() > 0);
        else if (*sample)
            run_sample(common, method, reps, emit, format, untilted, max_draws);
        else if (*est)
            run_estimate(common, stat, method, est_reps, workers, untilted, max_draws);
        else if (*table)
            run_table(table_id, table_reps, common, table_format, workers, no_timing);
        else if (*verify)
            return run_verify(max_n, theta_list);
        else if (*bench)
            run_bench(n_list, bench_thetas, methods, samples, trials, common);
    } catch (const MaxAttemptsExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kMaxAttempts;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}
