#include "freeknot/tau11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

#include "freeknot/errors.hpp"

namespace freeknot {
namespace {

constexpr double pi = std::numbers::pi;

// 2 * sum_{i>=1} (-1)^(i-1) r^(i^2), i.e. 1 - K(y) with r = exp(-2 y^2).
// Powers are advanced by r^(i+1)^2 = r^(i^2) * r^(2i+1).
double alternating_tail(double r, double tolerance) {
    const double cutoff = tolerance / 10.0;
    const double r2 = r * r;
    double power = r;
    double step = r2 * r;
    double sum = 0.0;
    double sign = 1.0;
    while (2.0 * power >= cutoff && power > 0.0) {
        sum += sign * 2.0 * power;
        sign = -sign;
        power *= step;
        step *= r2;
    }
    return sum;
}

// sum_{i>=1} q^((2i-1)^2) scaled by prefactor, with q = exp(-pi^2 / (8 x^2)).
// (2i+1)^2 - (2i-1)^2 = 8i.
double theta_sum(double q, double prefactor, double tolerance) {
    const double cutoff = tolerance / 10.0;
    const double q2 = q * q;
    const double q4 = q2 * q2;
    const double q8 = q4 * q4;
    double power = q;
    double step = q8;
    double sum = 0.0;
    while (prefactor * power >= cutoff && power > 0.0) {
        sum += power;
        power *= step;
        step *= q8;
    }
    return prefactor * sum;
}

void require_not_nan(double x, const char* what) {
    if (std::isnan(x)) throw DomainError(std::string(what) + ": NaN argument");
}

}  // namespace

double kolmogorov_cdf_alternating(double x, double tolerance) {
    require_not_nan(x, "kolmogorov_cdf_alternating");
    if (x <= 0.0) return 0.0;
    const double tail = alternating_tail(std::exp(-2.0 * x * x), tolerance);
    return std::clamp(1.0 - tail, 0.0, 1.0);
}

double kolmogorov_cdf_theta(double x, double tolerance) {
    require_not_nan(x, "kolmogorov_cdf_theta");
    if (x <= 0.0) return 0.0;
    const double q = std::exp(-pi * pi / (8.0 * x * x));
    const double value = theta_sum(q, std::sqrt(2.0 * pi) / x, tolerance);
    return std::clamp(value, 0.0, 1.0);
}

Tau11Dist::Tau11Dist(double cdf_tolerance, double quantile_tolerance)
    : cdf_tolerance_(cdf_tolerance), quantile_tolerance_(quantile_tolerance) {
    if (!(cdf_tolerance > 0.0) || !(quantile_tolerance > 0.0))
        throw DomainError("Tau11Dist: tolerances must be positive");
}

double Tau11Dist::kolmogorov_cdf(double x) const {
    require_not_nan(x, "kolmogorov_cdf");
    if (x <= 0.0) return 0.0;
    return x < 1.0 ? kolmogorov_cdf_theta(x, cdf_tolerance_)
                   : kolmogorov_cdf_alternating(x, cdf_tolerance_);
}

double Tau11Dist::cdf(double x) const {
    require_not_nan(x, "tau11 cdf");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    // y = 1/sqrt(x). For y >= 1 the alternating tail gives 1 - K(y) directly,
    // avoiding cancellation; otherwise subtract the theta series from one.
    if (x <= 1.0) {
        const double value = alternating_tail(std::exp(-2.0 / x), cdf_tolerance_);
        return std::clamp(value, 0.0, 1.0);
    }
    const double q = std::exp(-pi * pi * x / 8.0);
    const double k = theta_sum(q, std::sqrt(2.0 * pi * x), cdf_tolerance_);
    return std::clamp(1.0 - k, 0.0, 1.0);
}

double Tau11Dist::quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("tau11 quantile: p must lie in [0, 1)");
    if (p == 0.0) return 0.0;
    const auto excess = [&](double x) { return cdf(x) - p; };
    double lo = 0.0;
    double hi = bracket_upper;
    const double f_lo = -p;
    const double f_hi = excess(hi);
    if (f_hi < 0.0) return hi;
    // TOMS 748 keeps a sign-changing bracket and shrinks it superlinearly.
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        excess, lo, hi, f_lo, f_hi, [&](double l, double u) { return u - l <= 1e-3 * std::min(quantile_tolerance_, cdf_tolerance_); }, max_iter);
    lo = a;
    hi = b;
    // Bisect until the probability residual is also within tolerance.
    for (;;) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) return mid;
        const double f = excess(mid);
        if (hi - lo <= quantile_tolerance_ && std::abs(f) <= cdf_tolerance_) return mid;
        if (f < 0.0)
            lo = mid;
        else
            hi = mid;
    }
}

double Tau11Dist::sample(RandomStream& rng) const { return quantile(rng.uniform_open()); }

double Tau11Dist::mean() { return 14.0 * zeta3 / (pi * pi); }

}  // namespace freeknot
