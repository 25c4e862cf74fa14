#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "derange/harness.hpp"

namespace derange {

namespace {

constexpr std::array<int, 8> kTableIds{1, 2, 3, 4, 5, 6, 8, 9};
constexpr std::array<int, 3> kSizes{10, 50, 250};
constexpr std::array<double, 3> kThetas{0.5, 1.0, 5.0};
constexpr unsigned kMaxWorkers = 64;

std::string theta_prefix(double theta) {
    std::ostringstream os;
    os << "theta=" << theta << ' ';
    return os.str();
}

// Builds the wide layout: one group of columns per θ, rows labelled by n.
class TableBuilder {
public:
    TableBuilder(int id, std::string title, const TableOptions& options)
        : options_(options) {
        if (options.workers == 0 || options.workers > kMaxWorkers)
            throw std::invalid_argument("reproduce_table: workers must be in 1..64");
        table_.id = id;
        table_.title = std::move(title);
    }

    void add_columns(const std::vector<std::string_view>& names) {
        for (double theta : kThetas)
            for (auto name : names)
                table_.columns.push_back(theta_prefix(theta) + std::string(name));
    }

    TableRow& row(const std::string& label) {
        for (auto& r : table_.rows)
            if (r.label == label)
                return r;
        table_.rows.push_back({label, std::vector<std::optional<double>>(table_.columns.size())});
        return table_.rows.back();
    }

    void set(const std::string& label, double theta, std::string_view name, std::optional<double> v) {
        row(label).values[table_.column_index(theta_prefix(theta) + std::string(name))] = v;
    }

    // Every simulated cell draws from its own block of streams.
    std::vector<EstimateResult> simulate(std::span<const Statistic> stats, const ModelParams& p,
                                         Method method) {
        EstimateOptions eo;
        eo.workers = options_.workers;
        eo.stream_offset = static_cast<std::uint64_t>(cell_++) * kMaxWorkers;
        return estimate_many(stats, p, method, options_.reps, options_.seed, eo);
    }

    Table take() { return std::move(table_); }

private:
    TableOptions options_;
    Table table_;
    int cell_ = 0;
};

std::string label(int n) { return std::to_string(n); }

Table rejection_table(int id, const TableOptions& opt) {
    const bool poisson = id == 2;
    std::string title = poisson ? "Conditioning Relation method. Derangements of size n, "
                                  "acceptance over accepted runs. Values of c:"
                                : "Rejection method. Derangements of size n, acceptance over "
                                  "accepted runs.";
    if (poisson)
        for (double th : kThetas) {
            char buf[64];
            std::snprintf(buf, sizeof buf, " %.3f (theta = %g)", solve_tilt(th).c, th);
            title += buf;
        }
    TableBuilder b(id, title, opt);
    std::vector<std::string_view> names;
    if (opt.timings)
        names.push_back("time (secs)");
    names.insert(names.end(), {"accept rate", "theory"});
    if (poisson)
        names.push_back("exact");
    b.add_columns(names);

    const std::array<Statistic, 1> stats{Statistic::single_cycle};
    for (int n : kSizes)
        for (double th : kThetas) {
            const ModelParams p{n, th};
            const auto est = b.simulate(stats, p, poisson ? Method::poisson : Method::feller).front();
            if (opt.timings)
                b.set(label(n), th, "time (secs)", est.wall_seconds);
            b.set(label(n), th, "accept rate", est.acceptance_rate());
            if (poisson) {
                const TiltSolution tilt = solve_tilt(th);
                b.set(label(n), th, "theory", poisson_acceptance_asymptotic(p, tilt.c));
                b.set(label(n), th, "exact", poisson_acceptance_probability(p, tilt.x(n)));
            } else {
                b.set(label(n), th, "theory", LambdaTable(th, n)[n]);
            }
        }
    return b.take();
}

Table chain_timing_table(const TableOptions& opt) {
    TableBuilder b(3, "Markov chain method. Derangements of size n, run time.", opt);
    if (opt.timings)
        b.add_columns({"run time (secs)"});
    const std::array<Statistic, 1> stats{Statistic::single_cycle};
    for (int n : kSizes) {
        b.row(label(n));
        for (double th : kThetas) {
            const auto est = b.simulate(stats, {n, th}, Method::chain).front();
            if (opt.timings)
                b.set(label(n), th, "run time (secs)", est.wall_seconds);
        }
    }
    return b.take();
}

Table single_cycle_table(const TableOptions& opt) {
    TableBuilder b(4, "Probability that a derangement has a single cycle. Markov chain method.",
                   opt);
    b.add_columns({"sim", "exact", "asymp"});
    const std::array<Statistic, 1> stats{Statistic::single_cycle};
    for (int n : kSizes)
        for (double th : kThetas) {
            const ModelParams p{n, th};
            b.set(label(n), th, "sim", b.simulate(stats, p, Method::chain).front().point);
            b.set(label(n), th, "exact", single_cycle_prob(p));
            b.set(label(n), th, "asymp", single_cycle_asymptotic(p));
        }
    return b.take();
}

Table distinct_table(const TableOptions& opt) {
    TableBuilder b(5,
                   "Probability that a derangement has distinct cycle lengths. Markov chain "
                   "method; the last row is the n -> infinity limit.",
                   opt);
    b.add_columns({"distinct"});
    const std::array<Statistic, 1> stats{Statistic::distinct_lengths};
    for (int n : kSizes)
        for (double th : kThetas)
            b.set(label(n), th, "distinct", b.simulate(stats, {n, th}, Method::chain).front().point);
    for (double th : kThetas)
        b.set("inf", th, "distinct", distinct_lengths_limit(th));
    return b.take();
}

Table parity_table(const TableOptions& opt) {
    TableBuilder b(6,
                   "Probability alpha_n that a derangement has all odd cycle lengths and beta_n "
                   "that it has all even cycle lengths. Markov chain method.",
                   opt);
    b.add_columns({"alpha", "beta", "alpha exact", "beta exact"});
    const std::array<Statistic, 2> stats{Statistic::all_odd, Statistic::all_even};
    for (int n : {10, 11, 50, 51, 250, 251})
        for (double th : kThetas) {
            const ModelParams p{n, th};
            const auto est = b.simulate(stats, p, Method::chain);
            const bool even = n % 2 == 0;
            b.set(label(n), th, "alpha", est[0].point);
            b.set(label(n), th, "alpha exact", exact_statistic(Statistic::all_odd, p));
            if (even) {
                b.set(label(n), th, "beta", est[1].point);
                b.set(label(n), th, "beta exact", exact_statistic(Statistic::all_even, p));
            }
        }
    return b.take();
}

Table longest_table(const TableOptions& opt) {
    TableBuilder b(8,
                   "Probability o_n that the largest cycle length is the first, mean length E "
                   "A_1(n) of the first cycle and mean length E L_1(n) of the longest cycle. "
                   "Markov chain method.",
                   opt);
    b.add_columns({"o_n", "E A_1", "E L_1", "E A_1 exact"});
    const std::array<Statistic, 3> stats{Statistic::first_is_longest, Statistic::mean_first_cycle,
                                         Statistic::mean_longest_cycle};
    for (int n : kSizes)
        for (double th : kThetas) {
            const ModelParams p{n, th};
            const auto est = b.simulate(stats, p, Method::chain);
            b.set(label(n), th, "o_n", est[0].point);
            b.set(label(n), th, "E A_1", est[1].point);
            b.set(label(n), th, "E L_1", est[2].point);
            b.set(label(n), th, "E A_1 exact", first_cycle_mean(p));
        }
    return b.take();
}

Table monotone_table(const TableOptions& opt) {
    TableBuilder b(9,
                   "Probability that a derangement has weakly decreasing or weakly increasing "
                   "ordered cycle lengths. Markov chain method.",
                   opt);
    b.add_columns({"decreasing", "increasing", "decreasing exact", "increasing exact"});
    const std::array<Statistic, 2> stats{Statistic::weakly_decreasing, Statistic::weakly_increasing};
    for (int n : kSizes)
        for (double th : kThetas) {
            const ModelParams p{n, th};
            const auto est = b.simulate(stats, p, Method::chain);
            b.set(label(n), th, "decreasing", est[0].point);
            b.set(label(n), th, "increasing", est[1].point);
            b.set(label(n), th, "decreasing exact", exact_statistic(Statistic::weakly_decreasing, p));
            b.set(label(n), th, "increasing exact", exact_statistic(Statistic::weakly_increasing, p));
        }
    return b.take();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

std::optional<double> parse_cell(std::string_view cell) {
    if (cell.empty())
        return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::invalid_argument("table: bad numeric cell '" + std::string(cell) + "'");
    return v;
}

}  // namespace

std::size_t Table::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return i;
    throw std::out_of_range("table: no column '" + std::string(name) + "'");
}

std::optional<double> Table::value(std::string_view row_label, std::string_view column) const {
    const std::size_t c = column_index(column);
    for (const auto& r : rows)
        if (r.label == row_label)
            return r.values[c];
    throw std::out_of_range("table: no row '" + std::string(row_label) + "'");
}

std::span<const int> table_ids() { return kTableIds; }

Table reproduce_table(int id, const TableOptions& options) {
    if (options.reps == 0)
        throw std::invalid_argument("reproduce_table: reps must be positive");
    switch (id) {
    case 1:
    case 2:
        return rejection_table(id, options);
    case 3:
        return chain_timing_table(options);
    case 4:
        return single_cycle_table(options);
    case 5:
        return distinct_table(options);
    case 6:
        return parity_table(options);
    case 8:
        return longest_table(options);
    case 9:
        return monotone_table(options);
    default:
        throw std::invalid_argument("reproduce_table: no table with id " + std::to_string(id) +
                                    " (valid ids: 1-6, 8, 9)");
    }
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc())
        throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, ptr);
}

std::string to_csv(const Table& table) {
    std::string out = table.label_column;
    for (const auto& c : table.columns)
        out += ',' + c;
    out += '\n';
    for (const auto& r : table.rows) {
        out += r.label;
        for (const auto& v : r.values) {
            out += ',';
            if (v)
                out += format_number(*v);
        }
        out += '\n';
    }
    return out;
}

std::string to_markdown(const Table& table) {
    std::string out = "**Table " + std::to_string(table.id) + ".** " + table.title + "\n\n| " +
                      table.label_column;
    for (const auto& c : table.columns)
        out += " | " + c;
    out += " |\n|---";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out += "|---";
    out += "|\n";
    for (const auto& r : table.rows) {
        out += "| " + r.label;
        for (const auto& v : r.values) {
            out += " | ";
            if (v) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4g", *v);
                out += buf;
            }
        }
        out += " |\n";
    }
    return out;
}

std::string to_json(const Table& table) {
    nlohmann::json j;
    j["id"] = table.id;
    j["title"] = table.title;
    j["label_column"] = table.label_column;
    j["columns"] = table.columns;
    auto rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        auto values = nlohmann::json::array();
        for (const auto& v : r.values)
            values.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
        rows.push_back({{"label", r.label}, {"values", values}});
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

Table table_from_csv(std::string_view csv) {
    auto lines = split(csv, '\n');
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty())
        throw std::invalid_argument("table_from_csv: empty input");
    Table t;
    const auto header = split(lines.front(), ',');
    t.label_column = std::string(header.front());
    for (std::size_t i = 1; i < header.size(); ++i)
        t.columns.emplace_back(header[i]);
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto cells = split(lines[l], ',');
        if (cells.size() != header.size())
            throw std::invalid_argument("table_from_csv: row " + std::to_string(l) +
                                        " has the wrong number of cells");
        TableRow row{std::string(cells.front()), {}};
        for (std::size_t i = 1; i < cells.size(); ++i)
            row.values.push_back(parse_cell(cells[i]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table table_from_json(std::string_view json) {
    const auto j = nlohmann::json::parse(json);
    Table t;
    t.id = j.at("id").get<int>();
    t.title = j.at("title").get<std::string>();
    t.label_column = j.at("label_column").get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
        TableRow row{r.at("label").get<std::string>(), {}};
        for (const auto& v : r.at("values"))
            row.values.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace derange
