#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "freeknot/paths.hpp"
#include "freeknot/sde.hpp"
#include "freeknot/spline.hpp"

namespace freeknot {

/// One Milstein step:
/// x + a dt + sigma dW + 1/2 sigma sigma_x (dW^2 - dt), coefficients frozen
/// at (t_prev, x_prev).
///
/// Throws DomainError for dt <= 0 and NumericError for non-finite input or
/// output.
double milstein_step(const ScalarSde& sde, double t_prev, double x_prev, double dt, double dw);

/// Milstein values at every knot, starting from sde.x0.
std::vector<double> run_milstein_knots(const ScalarSde& sde, const KnotPath& knots);
std::vector<double> run_milstein_knots(const ScalarSde& sde, const KnotPath& knots, double x0);

/// The free-knot method: on (tau_{l-1}, tau_l] the approximation is
/// X(tau_{l-1}) + a (t - tau_{l-1}) + sigma (W~(t) - W(tau_{l-1})) with the
/// Milstein value at tau_{l-1} and W~ the knot interpolant of W. Each piece
/// ends at the Euler-type value, so the path may jump at knots.
SplinePath build_xtilde(const ScalarSde& sde, const KnotPath& knots);

/// As above with precomputed run_milstein_knots() output.
SplinePath build_xtilde(const ScalarSde& sde, const KnotPath& knots, std::span<const double> milstein_values);

/// Milstein scheme continued inside every knot interval with the true
/// path W. Agrees with run_milstein_knots() exactly at the knots. Requires
/// grid-oracle knots detected on `path`; ConfigError otherwise.
std::vector<double> run_milstein_continuous(const ScalarSde& sde, const KnotPath& knots, const GridPath& path);

/// Euler scheme with step 1/k on the nodes i/k, linearly interpolated.
/// k must divide the grid size (ConfigError otherwise).
SplinePath euler_fixed_interpolated(const ScalarSde& sde, std::size_t k, const GridPath& path);

/// x0 exp((mu - sigma0^2/2) t + sigma0 W(t)) on the grid.
std::vector<double> exact_gbm(double mu, double sigma0, double x0, const GridPath& path);

/// Same closed form at arbitrary (t, W(t)) pairs, e.g. knot times and values.
std::vector<double> exact_gbm(double mu, double sigma0, double x0, std::span<const double> times,
                              std::span<const double> w);

/// Ornstein-Uhlenbeck solution after integrating the stochastic integral by
/// parts; the remaining time integral of W uses the trapezoidal rule.
std::vector<double> exact_ou(double theta, double mean, double sigma, double x0, const GridPath& path);

/// Milstein scheme at full grid resolution.
std::vector<double> milstein_on_grid(const ScalarSde& sde, const GridPath& path);

/// Reference strong solution on the grid: closed form where available,
/// otherwise milstein_on_grid().
std::vector<double> reference_solution(const SdeSpec& spec, const GridPath& path);

}  // namespace freeknot
