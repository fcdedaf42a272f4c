#include "freeknot/schemes.hpp"

#include <cmath>
#include <string>

#include "freeknot/errors.hpp"

namespace freeknot {
namespace {

// Euler part of a step. Shared with build_xtilde() so that a vanishing
// Milstein correction reproduces the segment end values bit for bit.
inline double euler_value(double x, double drift, double diffusion, double dt, double dw) {
    return x + drift * dt + diffusion * dw;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string("milstein_step: non-finite ") + what);
}

}  // namespace

double milstein_step(const ScalarSde& sde, double t_prev, double x_prev, double dt, double dw) {
    if (!(dt > 0.0)) throw DomainError("milstein_step: dt must be positive");
    require_finite(t_prev, "time");
    require_finite(x_prev, "state");
    require_finite(dt, "step");
    require_finite(dw, "increment");
    const double a = sde.drift(t_prev, x_prev);
    const double s = sde.diffusion(t_prev, x_prev);
    const double s_x = sde.diffusion_dx(t_prev, x_prev);
    const double next = euler_value(x_prev, a, s, dt, dw) + 0.5 * s * s_x * (dw * dw - dt);
    require_finite(next, "result");
    return next;
}

std::vector<double> run_milstein_knots(const ScalarSde& sde, const KnotPath& knots) {
    return run_milstein_knots(sde, knots, sde.x0);
}

std::vector<double> run_milstein_knots(const ScalarSde& sde, const KnotPath& knots, double x0) {
    knots.validate();
    std::vector<double> x(knots.knot_times.size());
    x[0] = x0;
    for (std::size_t j = 1; j < x.size(); ++j) {
        const double dt = knots.knot_times[j] - knots.knot_times[j - 1];
        const double dw = knots.knot_values[j] - knots.knot_values[j - 1];
        x[j] = milstein_step(sde, knots.knot_times[j - 1], x[j - 1], dt, dw);
    }
    return x;
}

SplinePath build_xtilde(const ScalarSde& sde, const KnotPath& knots) {
    const auto milstein = run_milstein_knots(sde, knots);
    return build_xtilde(sde, knots, milstein);
}

SplinePath build_xtilde(const ScalarSde& sde, const KnotPath& knots, std::span<const double> milstein_values) {
    knots.validate();
    if (milstein_values.size() != knots.knot_times.size())
        throw ConfigError("build_xtilde: one Milstein value per knot required");
    std::vector<Segment> segments;
    segments.reserve(knots.intervals());
    for (std::size_t j = 1; j < knots.knot_times.size(); ++j) {
        const double t0 = knots.knot_times[j - 1];
        const double x = milstein_values[j - 1];
        const double dt = knots.knot_times[j] - t0;
        const double dw = knots.knot_values[j] - knots.knot_values[j - 1];
        const double end = euler_value(x, sde.drift(t0, x), sde.diffusion(t0, x), dt, dw);
        if (!std::isfinite(end)) throw NumericError("build_xtilde: non-finite segment value");
        segments.push_back({t0, knots.knot_times[j], x, end});
    }
    return SplinePath(milstein_values.front(), std::move(segments));
}

std::vector<double> run_milstein_continuous(const ScalarSde& sde, const KnotPath& knots, const GridPath& path) {
    if (knots.regime != KnotRegime::grid_oracle)
        throw ConfigError("run_milstein_continuous: knots must come from grid detection");
    knots.validate();
    const auto& idx = knots.grid_indices;
    if (idx.back() != path.steps()) throw ConfigError("run_milstein_continuous: knots belong to another grid");
    for (std::size_t j = 0; j < idx.size(); ++j)
        if (knots.knot_values[j] != path[idx[j]] || knots.knot_times[j] != path.time(idx[j]))
            throw ConfigError("run_milstein_continuous: knots belong to another path");

    std::vector<double> x(path.steps() + 1);
    x[0] = sde.x0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        const std::size_t begin = idx[j - 1];
        const double t0 = path.time(begin);
        const double x_begin = x[begin];
        for (std::size_t i = begin + 1; i <= idx[j]; ++i)
            x[i] = milstein_step(sde, t0, x_begin, path.time(i) - t0, path[i] - path[begin]);
    }
    return x;
}

SplinePath euler_fixed_interpolated(const ScalarSde& sde, std::size_t k, const GridPath& path) {
    const std::size_t n = path.steps();
    if (k == 0 || n % k != 0)
        throw ConfigError("euler_fixed_interpolated: k = " + std::to_string(k) + " must divide the grid size " +
                          std::to_string(n));
    const std::size_t stride = n / k;
    std::vector<Segment> segments;
    segments.reserve(k);
    double x = sde.x0;
    for (std::size_t i = 0; i < k; ++i) {
        const double t0 = path.time(i * stride);
        const double t1 = path.time((i + 1) * stride);
        const double dw = path[(i + 1) * stride] - path[i * stride];
        const double next = euler_value(x, sde.drift(t0, x), sde.diffusion(t0, x), t1 - t0, dw);
        if (!std::isfinite(next)) throw NumericError("euler_fixed_interpolated: non-finite state");
        segments.push_back({t0, t1, x, next});
        x = next;
    }
    return SplinePath(sde.x0, std::move(segments));
}

std::vector<double> exact_gbm(double mu, double sigma0, double x0, const GridPath& path) {
    std::vector<double> x(path.steps() + 1);
    const double drift = mu - 0.5 * sigma0 * sigma0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0 * std::exp(drift * path.time(i) + sigma0 * path[i]);
    return x;
}

std::vector<double> exact_gbm(double mu, double sigma0, double x0, std::span<const double> times,
                              std::span<const double> w) {
    if (times.size() != w.size()) throw ConfigError("exact_gbm: times and values differ in length");
    std::vector<double> x(times.size());
    const double drift = mu - 0.5 * sigma0 * sigma0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0 * std::exp(drift * times[i] + sigma0 * w[i]);
    return x;
}

std::vector<double> exact_ou(double theta, double mean, double sigma, double x0, const GridPath& path) {
    // int_0^t e^{-theta (t-s)} dW(s) = W(t) - theta int_0^t e^{-theta (t-s)} W(s) ds.
    std::vector<double> x(path.steps() + 1);
    const double h = path.step();
    const double decay = std::exp(-theta * h);
    double integral = 0.0;
    x[0] = x0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        integral = decay * integral + 0.5 * h * (decay * path[i - 1] + path[i]);
        const double t = path.time(i);
        x[i] = mean + (x0 - mean) * std::exp(-theta * t) + sigma * (path[i] - theta * integral);
    }
    return x;
}

std::vector<double> milstein_on_grid(const ScalarSde& sde, const GridPath& path) {
    std::vector<double> x(path.steps() + 1);
    x[0] = sde.x0;
    for (std::size_t i = 1; i < x.size(); ++i)
        x[i] = milstein_step(sde, path.time(i - 1), x[i - 1], path.time(i) - path.time(i - 1), path[i] - path[i - 1]);
    return x;
}

std::vector<double> reference_solution(const SdeSpec& spec, const GridPath& path) {
    if (spec.name == "gbm") return exact_gbm(spec.mu, spec.sigma0, spec.x0, path);
    if (spec.name == "ou") return exact_ou(spec.theta, spec.mean, spec.sigma, spec.x0, path);
    return milstein_on_grid(make_sde(spec), path);
}

}  // namespace freeknot
