#include "derange/counting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace derange {

double log_big(const BigInt& value) {
    if (value.is_zero())
        return -std::numeric_limits<double>::infinity();
    if (value < 0)
        throw std::domain_error("log_big: negative argument");
    const unsigned msb = boost::multiprecision::msb(value);
    if (msb < 1000)
        return std::log(value.convert_to<double>());
    // The two most significant limbs carry all the precision a double can hold.
    const auto& backend = value.backend();
    const std::size_t size = backend.size();
    const auto* limbs = backend.limbs();
    constexpr double limb_base = 18446744073709551616.0;  // 2^64
    const double top = static_cast<double>(limbs[size - 1]) * limb_base +
                       static_cast<double>(limbs[size - 2]);
    return std::log(top) + static_cast<double>(64 * (size - 2)) * std::log(2.0);
}

StirlingTriangle::StirlingTriangle(int n_max) : n_max_(n_max) {
    if (n_max < 0)
        throw std::invalid_argument("StirlingTriangle: n_max must be non-negative");
    rows_.resize(static_cast<std::size_t>(n_max) + 1);
    rows_[0] = {BigInt(1)};
    for (int n = 1; n <= n_max; ++n) {
        auto& row = rows_[static_cast<std::size_t>(n)];
        const auto& prev = rows_[static_cast<std::size_t>(n - 1)];
        row.assign(static_cast<std::size_t>(n) + 1, BigInt(0));
        for (int k = 1; k <= n; ++k) {
            BigInt v = prev[static_cast<std::size_t>(k - 1)];
            if (k <= n - 1)
                v += BigInt(n - 1) * prev[static_cast<std::size_t>(k)];
            row[static_cast<std::size_t>(k)] = std::move(v);
        }
    }
}

const BigInt& StirlingTriangle::operator()(int n, int k) const {
    static const BigInt zero(0);
    if (n < 0 || n > n_max_)
        throw std::out_of_range("StirlingTriangle: n outside table");
    if (k < 0 || k > n)
        return zero;
    return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

BigInt stirling_first_unsigned(int n, int k) {
    if (n < 0 || k < 0 || k > n)
        throw std::invalid_argument("stirling_first_unsigned: need 0 <= k <= n");
    return StirlingTriangle(n)(n, k);
}

BigInt binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    BigInt result = 1;
    for (int i = 1; i <= k; ++i) {
        result *= n - k + i;
        result /= i;
    }
    return result;
}

namespace {

BigInt derangement_cycle_count(const StirlingTriangle& s, int n, int k) {
    if (n < 2 || k < 1 || k > n / 2)
        return 0;
    BigInt sum = 0;
    BigInt choose = 1;  // C(n, l)
    for (int l = 0; l <= k; ++l) {
        const BigInt term = choose * s(n - l, k - l);
        if (l % 2 == 0)
            sum += term;
        else
            sum -= term;
        choose = choose * (n - l) / (l + 1);
    }
    return sum;
}

}  // namespace

BigInt derangement_cycle_count(int n, int k) {
    if (n < 0)
        throw std::invalid_argument("derangement_cycle_count: n must be non-negative");
    if (n < 2 || k < 1 || k > n / 2)
        return 0;
    return derangement_cycle_count(StirlingTriangle(n), n, k);
}

std::vector<BigInt> derangement_cycle_counts(int n) {
    if (n < 0)
        throw std::invalid_argument("derangement_cycle_counts: n must be non-negative");
    const StirlingTriangle s(n);
    std::vector<BigInt> out(static_cast<std::size_t>(n / 2) + 1, BigInt(0));
    for (int k = 1; k <= n / 2; ++k)
        out[static_cast<std::size_t>(k)] = derangement_cycle_count(s, n, k);
    return out;
}

BigInt derangement_number(int n) {
    if (n < 0)
        throw std::invalid_argument("derangement_number: n must be non-negative");
    BigInt d0 = 1, d1 = 0;
    if (n == 0)
        return d0;
    for (int i = 2; i <= n; ++i) {
        BigInt d2 = BigInt(i - 1) * (d1 + d0);
        d0 = std::move(d1);
        d1 = std::move(d2);
    }
    return d1;
}

}  // namespace derange
