#pragma once

#include "freeknot/random.hpp"

namespace freeknot {

/// Apery's constant, zeta(3).
inline constexpr double zeta3 = 1.2020569031595942854;

/// Kolmogorov distribution function K(x) from the alternating series
/// 1 + 2 * sum_{i>=1} (-1)^i exp(-2 i^2 x^2). Fast for x >= 1.
///
/// Terms are summed until the next one drops below tolerance / 10.
double kolmogorov_cdf_alternating(double x, double tolerance);

/// K(x) from the theta-transformed series
/// sqrt(2 pi)/x * sum_{i>=1} exp(-(2i-1)^2 pi^2 / (8 x^2)). Fast for x < 1.
double kolmogorov_cdf_theta(double x, double tolerance);

/// Law of tau(1,1), the first time a Brownian path leaves the unit band
/// around the chord joining its start to its current endpoint.
///
/// P(tau < x) = 1 - K(1/sqrt(x)) and E tau = 14 zeta(3) / pi^2.
class Tau11Dist {
public:
    static constexpr double default_cdf_tolerance = 1e-12;
    static constexpr double default_quantile_tolerance = 1e-10;
    /// Upper end of the inversion bracket; cdf(64) exceeds 1 - 1e-12.
    static constexpr double bracket_upper = 64.0;

    explicit Tau11Dist(double cdf_tolerance = default_cdf_tolerance,
                       double quantile_tolerance = default_quantile_tolerance);

    double cdf_tolerance() const { return cdf_tolerance_; }
    double quantile_tolerance() const { return quantile_tolerance_; }

    /// K(x): 0 for x <= 0, theta series below 1, alternating series from 1 on.
    double kolmogorov_cdf(double x) const;

    /// P(tau(1,1) < x).
    double cdf(double x) const;

    /// Inverse of cdf() on [0, bracket_upper]: TOMS 748 bracketing, then
    /// bisection until both tolerances hold. Throws DomainError unless
    /// 0 <= p < 1.
    double quantile(double p) const;

    /// Inverse-transform draw; strictly positive.
    double sample(RandomStream& rng) const;

    /// E tau(1,1) = 14 zeta(3) / pi^2.
    static double mean();

private:
    double cdf_tolerance_;
    double quantile_tolerance_;
};

inline double tau11_mean() { return Tau11Dist::mean(); }

}  // namespace freeknot
