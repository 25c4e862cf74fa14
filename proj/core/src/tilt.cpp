#include <cmath>
#include <limits>
#include <stdexcept>

#include "derange/chain.hpp"

namespace derange {

namespace {

double tilt_equation(double theta, double c) { return theta * (1.0 - std::exp(-c)) - c; }
double tilt_slope(double theta, double c) { return theta * std::exp(-c) - 1.0; }

// Newton steps kept inside [lo, hi]; falls back to bisection whenever a step
// leaves the bracket or fails to halve the residual.
double safeguarded_newton(double theta, double lo, double hi, double guess) {
    double f_lo = tilt_equation(theta, lo);
    if (f_lo == 0.0)
        return lo;
    if (tilt_equation(theta, hi) == 0.0)
        return hi;
    double c = guess;
    double f = tilt_equation(theta, c);
    for (int iter = 0; iter < 200; ++iter) {
        if (f == 0.0)
            return c;
        if ((f < 0.0) == (f_lo < 0.0)) {
            lo = c;
            f_lo = f;
        } else {
            hi = c;
        }
        const double slope = tilt_slope(theta, c);
        double next = c - f / slope;
        if (!(slope != 0.0) || !(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        double f_next = tilt_equation(theta, next);
        if (std::abs(f_next) > 0.5 * std::abs(f) && next != 0.5 * (lo + hi)) {
            next = 0.5 * (lo + hi);
            f_next = tilt_equation(theta, next);
        }
        const double step = std::abs(next - c);
        c = next;
        f = f_next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c)))
            break;
    }
    return c;
}

}  // namespace

double entire_exponential_integral(double c) {
    if (c > 10.0)
        return kEulerGamma + std::log(c) - std::expint(-c);
    double sum = 0.0;
    double power_over_fact = 1.0;  // c^k / k!
    for (int k = 1; k < 1000; ++k) {
        power_over_fact *= c / k;
        const double term = (k % 2 == 1 ? 1.0 : -1.0) * power_over_fact / k;
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum))
            break;
    }
    return sum;
}

double TiltSolution::x(int n) const {
    if (n < 1)
        throw std::invalid_argument("TiltSolution::x: n must be positive");
    return std::exp(-c / n);
}

double TiltSolution::residual() const { return tilt_equation(theta, c); }

TiltSolution solve_tilt(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("solve_tilt: theta must be positive and finite");
    TiltSolution out;
    out.theta = theta;
    if (theta == 1.0)
        return out;

    // Exclude the trivial root at 0; the other root sits near 2(θ-1)/θ when θ ≈ 1.
    const double gap = std::min(1e-8, 0.1 * std::abs(theta - 1.0));
    if (theta > 1.0) {
        const double hi = theta + 1.0;
        out.c = safeguarded_newton(theta, gap, hi, theta);
    } else {
        double lo = -1.0;
        while (tilt_equation(theta, lo) > 0.0 && lo > -700.0)
            lo *= 2.0;
        out.c = safeguarded_newton(theta, lo, -gap, 0.5 * (lo - gap));
    }
    out.u = -out.c + theta * entire_exponential_integral(out.c);
    out.speedup = std::exp(out.u);
    return out;
}

double poisson_acceptance_probability(const ModelParams& params, double x) {
    params.validate();
    if (!(x > 0.0))
        throw std::invalid_argument("poisson_acceptance_probability: x must be positive");
    const LambdaTable table(params.theta, params.n);
    double mean_sum = 0.0;
    double xj = x;
    for (int j = 2; j <= params.n; ++j) {
        xj *= x;
        mean_sum += xj / j;
    }
    const double log_p = params.n * std::log(x) - params.theta * mean_sum +
                         std::log(table[params.n]) +
                         rising_factorial_log(params.theta, params.n).value -
                         std::lgamma(params.n + 1.0);
    return std::exp(log_p);
}

double poisson_acceptance_asymptotic(const ModelParams& params, double c) {
    params.validate();
    const double u = c == 0.0 ? 0.0 : -c + params.theta * entire_exponential_integral(c);
    return std::exp(-kEulerGamma * params.theta + u - std::lgamma(params.theta)) / params.n;
}

}  // namespace derange
