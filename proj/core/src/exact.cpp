#include "derange/exact.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "derange/counting.hpp"

namespace derange {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// ln(λ_m θ_(m) / m!), the log-probability weight of a derangement-free block of size m.
double log_block_weight(const LambdaTable& table, int m) {
    const double lam = table[m];
    if (lam <= 0.0)
        return kNegInf;
    return std::log(lam) + rising_factorial_log(table.theta(), m).value - log_factorial(m);
}

// ln(n! / (λ_n θ_(n))), the ESF normalisation conditioned on no fixed points.
double log_normaliser(const LambdaTable& table, int n) {
    return log_factorial(n) - std::log(table[n]) - rising_factorial_log(table.theta(), n).value;
}

// Σ sign_i exp(log_i) evaluated relative to the largest magnitude.
double signed_log_sum(std::span<const double> logs, std::span<const int> signs) {
    double top = kNegInf;
    for (double l : logs)
        top = std::max(top, l);
    if (top == kNegInf)
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i)
        acc += signs[i] * std::exp(logs[i] - top);
    return acc * std::exp(top);
}

}  // namespace

void ModelParams::validate(int min_n) const {
    if (n < min_n)
        throw std::invalid_argument("n must be at least " + std::to_string(min_n));
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("theta must be positive and finite");
}

LambdaTable::LambdaTable(double theta, int n_max) : theta_(theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("LambdaTable: theta must be positive and finite");
    if (n_max < 0)
        throw std::invalid_argument("LambdaTable: n_max must be non-negative");
    values_.resize(static_cast<std::size_t>(n_max) + 1);
    values_[0] = 1.0;
    if (n_max >= 1)
        values_[1] = 0.0;
    for (int i = 2; i <= n_max; ++i) {
        const double a = values_[static_cast<std::size_t>(i - 1)];
        const double b = values_[static_cast<std::size_t>(i - 2)];
        values_[static_cast<std::size_t>(i)] =
            (i - 1) / (theta + i - 1) * (a + theta / (theta + i - 2) * b);
    }
}

double LambdaTable::at(int i) const {
    if (i < 0 || i > n_max())
        throw std::out_of_range("LambdaTable: index " + std::to_string(i) + " outside 0.." +
                                std::to_string(n_max()));
    return values_[static_cast<std::size_t>(i)];
}

LogWeight rising_factorial_log(double theta, int n) {
    if (n < 0)
        throw std::invalid_argument("rising_factorial_log: n must be non-negative");
    if (n == 0)
        return {0.0};
    return {std::lgamma(theta + n) - std::lgamma(theta)};
}

AltSumResult lambda_altsum(double theta, int n, double cancellation_limit) {
    if (n < 0)
        throw std::invalid_argument("lambda_altsum: n must be non-negative");
    if (n == 0)
        return {1.0, 1.0, true};

    // term_j = (-1)^j θ^j/j! · n!/(n-j)! · Γ(n+θ-j)/Γ(n+θ); term_0 = 1.
    std::vector<double> logs(static_cast<std::size_t>(n) + 1);
    std::vector<int> signs(static_cast<std::size_t>(n) + 1);
    logs[0] = 0.0;
    signs[0] = 1;
    for (int j = 1; j <= n; ++j) {
        logs[static_cast<std::size_t>(j)] = logs[static_cast<std::size_t>(j - 1)] +
                                            std::log(theta) + std::log(n - j + 1.0) -
                                            std::log(static_cast<double>(j)) -
                                            std::log(n + theta - j);
        signs[static_cast<std::size_t>(j)] = (j % 2 == 0) ? 1 : -1;
    }

    AltSumResult out;
    out.value = signed_log_sum(logs, signs);
    const double top = std::exp(*std::max_element(logs.begin(), logs.end()));
    out.cancellation = out.value != 0.0 ? top / std::abs(out.value)
                                        : std::numeric_limits<double>::infinity();
    // n == 1 cancels exactly: both terms have log-magnitude 0.
    if (n == 1) {
        out.value = 0.0;
        out.cancellation = 1.0;
    }
    out.reliable = out.cancellation <= cancellation_limit;
    return out;
}

CycleType::CycleType(int n) : n_(n), counts_(static_cast<std::size_t>(std::max(n, 0)) + 1, 0) {
    if (n < 0)
        throw std::invalid_argument("CycleType: n must be non-negative");
}

CycleType CycleType::from_lengths(int n, std::span<const int> lengths) {
    CycleType t(n);
    for (int len : lengths)
        t.add_cycle(len);
    if (t.total() != n)
        throw std::invalid_argument("CycleType: cycle lengths do not sum to n");
    return t;
}

int CycleType::count(int j) const {
    if (j < 0 || j > n_)
        return 0;
    return counts_[static_cast<std::size_t>(j)];
}

void CycleType::add_cycle(int length) {
    if (length < 2 || length > n_)
        throw std::invalid_argument("CycleType: cycle length " + std::to_string(length) +
                                    " outside 2..n");
    ++counts_[static_cast<std::size_t>(length)];
}

void CycleType::remove_cycle(int length) {
    if (count(length) == 0)
        throw std::invalid_argument("CycleType: no cycle of length " + std::to_string(length));
    --counts_[static_cast<std::size_t>(length)];
}

int CycleType::num_cycles() const {
    int k = 0;
    for (int c : counts_)
        k += c;
    return k;
}

int CycleType::total() const {
    int t = 0;
    for (std::size_t j = 0; j < counts_.size(); ++j)
        t += static_cast<int>(j) * counts_[j];
    return t;
}

bool CycleType::valid() const {
    if (n_ < 2 || counts_.size() != static_cast<std::size_t>(n_) + 1)
        return false;
    if (counts_[0] != 0 || counts_[1] != 0)
        return false;
    return std::all_of(counts_.begin(), counts_.end(), [](int c) { return c >= 0; }) &&
           total() == n_;
}

std::vector<int> CycleType::lengths_descending() const {
    std::vector<int> out;
    for (int j = n_; j >= 2; --j)
        out.insert(out.end(), static_cast<std::size_t>(count(j)), j);
    return out;
}

std::string CycleType::to_string() const {
    std::ostringstream os;
    os << '(';
    bool first = true;
    for (int j = 2; j <= n_; ++j)
        for (int c = 0; c < count(j); ++c) {
            os << (first ? "" : ",") << j;
            first = false;
        }
    os << ')';
    return os.str();
}

double factorial_moment(const ModelParams& params, const MomentOrders& orders) {
    params.validate();
    long long m = 0;
    double log_prod = 0.0;
    for (const auto& [j, r] : orders) {
        if (j < 2)
            throw std::invalid_argument("factorial_moment: cycle lengths start at 2");
        if (r < 0)
            throw std::invalid_argument("factorial_moment: orders must be non-negative");
        m += static_cast<long long>(j) * r;
        log_prod += r * std::log(params.theta / j);
    }
    if (m > params.n)
        return 0.0;
    const LambdaTable table(params.theta, params.n);
    const double rest = log_block_weight(table, params.n - static_cast<int>(m));
    if (rest == kNegInf)
        return 0.0;
    return std::exp(log_normaliser(table, params.n) + rest + log_prod);
}

double mean_cycle_count(const ModelParams& params, int j) {
    params.validate();
    if (j < 2 || j > params.n)
        throw std::invalid_argument("mean_cycle_count: need 2 <= j <= n");
    return factorial_moment(params, {{j, 1}});
}

std::vector<double> cycle_count_distribution(const ModelParams& params, int j) {
    params.validate();
    if (j < 2 || j > params.n)
        throw std::invalid_argument("cycle_count_distribution: need 2 <= j <= n");
    const LambdaTable table(params.theta, params.n);
    const int top = params.n / j;
    const double base = log_normaliser(table, params.n);
    const double log_ratio = std::log(params.theta / j);

    // log u_i, the i-th falling factorial moment of C̃_j(n).
    std::vector<double> log_u(static_cast<std::size_t>(top) + 1);
    for (int i = 0; i <= top; ++i)
        log_u[static_cast<std::size_t>(i)] =
            base + log_block_weight(table, params.n - j * i) + i * log_ratio;

    std::vector<double> pmf(static_cast<std::size_t>(top) + 1);
    std::vector<double> logs;
    std::vector<int> signs;
    for (int r = 0; r <= top; ++r) {
        logs.clear();
        signs.clear();
        for (int i = r; i <= top; ++i) {
            logs.push_back(log_u[static_cast<std::size_t>(i)] - log_factorial(i - r) -
                           log_factorial(r));
            signs.push_back((i - r) % 2 == 0 ? 1 : -1);
        }
        pmf[static_cast<std::size_t>(r)] = std::clamp(signed_log_sum(logs, signs), 0.0, 1.0);
    }
    return pmf;
}

double cycle_count_pmf(const ModelParams& params, int j, int r) {
    params.validate();
    if (j < 2 || j > params.n)
        throw std::invalid_argument("cycle_count_pmf: need 2 <= j <= n");
    if (r < 0 || r > params.n / j)
        throw std::invalid_argument("cycle_count_pmf: need 0 <= r <= n/j");
    return cycle_count_distribution(params, j)[static_cast<std::size_t>(r)];
}

std::vector<double> num_cycles_distribution(const ModelParams& params) {
    params.validate();
    const LambdaTable table(params.theta, params.n);
    const double base =
        -std::log(table[params.n]) - rising_factorial_log(params.theta, params.n).value;
    const auto counts = derangement_cycle_counts(params.n);
    std::vector<double> pmf(counts.size(), 0.0);
    for (std::size_t k = 1; k < counts.size(); ++k)
        pmf[k] = std::exp(static_cast<double>(k) * std::log(params.theta) + log_big(counts[k]) +
                          base);
    return pmf;
}

double num_cycles_pmf(const ModelParams& params, int k) {
    params.validate();
    if (k < 1 || k > params.n / 2)
        throw std::invalid_argument("num_cycles_pmf: need 1 <= k <= n/2");
    return num_cycles_distribution(params)[static_cast<std::size_t>(k)];
}

double num_cycles_mean(const ModelParams& params) {
    params.validate();
    const LambdaTable table(params.theta, params.n);
    const double base = log_normaliser(table, params.n);
    double sum = 0.0;
    for (int j = 2; j <= params.n; ++j) {
        const double rest = log_block_weight(table, params.n - j);
        if (rest != kNegInf)
            sum += std::exp(base + rest + std::log(params.theta / j));
    }
    return sum;
}

double single_cycle_prob(const ModelParams& params) {
    params.validate();
    const LambdaTable table(params.theta, params.n);
    return std::exp(log_normaliser(table, params.n) + std::log(params.theta / params.n));
}

double single_cycle_asymptotic(const ModelParams& params) {
    params.validate();
    return std::exp(std::lgamma(params.theta + 1.0) +
                    params.theta * (1.0 - std::log(static_cast<double>(params.n))));
}

double first_cycle_survival(const ModelParams& params, int l) {
    params.validate();
    if (l < 0 || l > params.n)
        throw std::invalid_argument("first_cycle_survival: need 0 <= l <= n");
    const LambdaTable table(params.theta, params.n);
    const double theta = params.theta;
    double p = 1.0;
    for (int r = params.n - l + 1; r <= params.n - 1; ++r) {
        const double stay = (theta + r - 1) * table[r];
        p *= stay / (stay + theta * table[r - 1]);
    }
    return p;
}

double first_cycle_mean(const ModelParams& params) {
    params.validate();
    const LambdaTable table(params.theta, params.n);
    const double theta = params.theta;
    // Σ_{l=0}^{n-1} P(A_1 > l), with the survival product grown one factor at a time.
    double survival = 1.0;
    double mean = 1.0;
    for (int l = 1; l < params.n; ++l) {
        const int r = params.n - l + 1;
        if (r <= params.n - 1) {
            const double stay = (theta + r - 1) * table[r];
            survival *= stay / (stay + theta * table[r - 1]);
        }
        mean += survival;
    }
    return mean;
}

double distinct_lengths_limit(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("distinct_lengths_limit: theta must be positive");
    return std::exp(-theta * (kEulerGamma - 1.0) - std::lgamma(theta + 2.0));
}

}  // namespace derange
