#include "freeknot/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freeknot/errors.hpp"

namespace freeknot {

GridPath::GridPath(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw DomainError("GridPath: need at least one step");
    if (values_.front() != 0.0) throw DomainError("GridPath: W(0) must be 0");
}

double GridPath::max_increment() const {
    double m = 0.0;
    for (std::size_t i = 1; i < values_.size(); ++i) m = std::max(m, std::abs(values_[i] - values_[i - 1]));
    return m;
}

GridPath sample_grid_path(std::size_t n, RandomStream& rng) {
    if (n == 0) throw DomainError("sample_grid_path: n must be at least 1");
    const double scale = std::sqrt(1.0 / static_cast<double>(n));
    std::vector<double> values(n + 1);
    values[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) values[i] = values[i - 1] + scale * rng.gaussian();
    return GridPath(std::move(values));
}

double KnotPath::normalized_increment(std::size_t j) const {
    return (knot_values[j] - knot_values[j - 1]) / std::sqrt(interval_length(j));
}

void KnotPath::validate() const {
    if (knot_times.size() < 2 || knot_times.size() != knot_values.size())
        throw ConfigError("KnotPath: knot arrays must hold at least [0, 1] and match in length");
    if (knot_times.front() != 0.0 || knot_times.back() != 1.0)
        throw ConfigError("KnotPath: knots must start at 0 and end at 1");
    if (knot_values.front() != 0.0) throw ConfigError("KnotPath: W(0) must be 0");
    for (std::size_t j = 1; j < knot_times.size(); ++j)
        if (!(knot_times[j] > knot_times[j - 1])) throw ConfigError("KnotPath: knot times must increase strictly");
    if (regime == KnotRegime::grid_oracle && grid_indices.size() != knot_times.size())
        throw ConfigError("KnotPath: grid-oracle knots need one grid index per knot");
}

namespace {

void check_range(const GridPath& path, std::size_t i0, std::size_t i1) {
    if (i0 >= i1 || i1 > path.steps())
        throw DomainError("max_chord_deviation: need 0 <= i0 < i1 <= n, got [" + std::to_string(i0) + ", " +
                          std::to_string(i1) + "]");
}

void check_eps(const GridPath& path, double eps, ResolutionGuard guard) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("knot detection: eps must be positive");
    if (guard == ResolutionGuard::enforce && path.step() * resolution_guard_ratio > eps * eps)
        throw ConfigError("knot detection: grid step " + std::to_string(path.step()) +
                          " violates h <= eps^2/50 for eps = " + std::to_string(eps));
}

template <typename NextKnot>
KnotPath detect_with(const GridPath& path, double eps, NextKnot next_knot) {
    KnotPath knots;
    knots.eps = eps;
    knots.regime = KnotRegime::grid_oracle;
    knots.knot_times.push_back(0.0);
    knots.knot_values.push_back(path[0]);
    knots.grid_indices.push_back(0);
    const std::size_t n = path.steps();
    std::size_t start = 0;
    while (start < n) {
        const KnotSearch found = next_knot(start);
        // A knot detected exactly at the horizon is tau_{N+1} = 1, not interior.
        knots.knot_times.push_back(path.time(found.index));
        knots.knot_values.push_back(path[found.index]);
        knots.grid_indices.push_back(found.index);
        start = found.index;
    }
    return knots;
}

}  // namespace

double max_chord_deviation(const GridPath& path, std::size_t i0, std::size_t i1) {
    check_range(path, i0, i1);
    const double v0 = path[i0];
    const double v1 = path[i1];
    double best = 0.0;
    for (std::size_t i = i0 + 1; i < i1; ++i)
        best = std::max(best, std::abs(chord_residual(i0, v0, i1, v1, i, path[i])));
    return best;
}

double max_chord_deviation_hull(const GridPath& path, std::size_t i0, std::size_t i1) {
    check_range(path, i0, i1);
    ChordDeviationTracker tracker;
    tracker.reset(i0, path[i0]);
    for (std::size_t i = i0 + 1; i < i1; ++i) tracker.push(i, path[i]);
    return tracker.max_deviation(i1, path[i1]);
}

void ChordDeviationTracker::reset(std::size_t anchor_index, double anchor_value) {
    anchor_index_ = anchor_index;
    anchor_value_ = anchor_value;
    upper_.clear();
    lower_.clear();
    upper_.push_back({anchor_index, anchor_value});
    lower_.push_back({anchor_index, anchor_value});
}

void ChordDeviationTracker::push(std::size_t index, double value) {
    // Cross product of (b - a) x (c - a); indices are small enough to be
    // exact as doubles.
    const auto cross = [](const Point& a, const Point& b, const Point& c) {
        const double bx = static_cast<double>(b.index - a.index);
        const double cx = static_cast<double>(c.index - a.index);
        return bx * (c.value - a.value) - (b.value - a.value) * cx;
    };
    const Point p{index, value};
    while (upper_.size() >= 2 && cross(upper_[upper_.size() - 2], upper_.back(), p) >= 0.0) upper_.pop_back();
    upper_.push_back(p);
    while (lower_.size() >= 2 && cross(lower_[lower_.size() - 2], lower_.back(), p) <= 0.0) lower_.pop_back();
    lower_.push_back(p);
}

template <typename Residual>
double ChordDeviationTracker::peak(const std::vector<Point>& hull, Residual residual) {
    std::size_t lo = 0;
    std::size_t hi = hull.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (residual(hull[mid]) < residual(hull[mid + 1]))
            lo = mid + 1;
        else
            hi = mid;
    }
    // Rounding can make the residual sequence flat near the peak; look at
    // the neighbours as well.
    double best = residual(hull[lo]);
    if (lo > 0) best = std::max(best, residual(hull[lo - 1]));
    if (lo + 1 < hull.size()) best = std::max(best, residual(hull[lo + 1]));
    return best;
}

double ChordDeviationTracker::max_deviation(std::size_t index, double value) const {
    const auto above = [&](const Point& p) {
        return chord_residual(anchor_index_, anchor_value_, index, value, p.index, p.value);
    };
    const auto below = [&](const Point& p) {
        return -chord_residual(anchor_index_, anchor_value_, index, value, p.index, p.value);
    };
    return std::max(peak(upper_, above), peak(lower_, below));
}

KnotSearch next_knot_on_grid(const GridPath& path, std::size_t start, double eps) {
    const std::size_t n = path.steps();
    if (start >= n) throw DomainError("next_knot_on_grid: start must precede the horizon");
    ChordDeviationTracker tracker;
    tracker.reset(start, path[start]);
    for (std::size_t t = start + 1; t <= n; ++t) {
        if (t - 1 > start) tracker.push(t - 1, path[t - 1]);
        if (tracker.max_deviation(t, path[t]) > eps) return {t, true};
    }
    return {n, false};
}

KnotPath detect_knots_on_grid(const GridPath& path, double eps, ResolutionGuard guard) {
    check_eps(path, eps, guard);
    return detect_with(path, eps, [&](std::size_t start) { return next_knot_on_grid(path, start, eps); });
}

KnotPath detect_knots_on_grid_naive(const GridPath& path, double eps, ResolutionGuard guard) {
    check_eps(path, eps, guard);
    const std::size_t n = path.steps();
    return detect_with(path, eps, [&](std::size_t start) -> KnotSearch {
        for (std::size_t t = start + 1; t <= n; ++t)
            if (max_chord_deviation(path, start, t) > eps) return {t, true};
        return {n, false};
    });
}

KnotPath sample_knot_sequence(double eps, RandomStream& rng, const Tau11Dist& dist) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("sample_knot_sequence: eps must be positive");
    KnotPath knots;
    knots.eps = eps;
    knots.regime = KnotRegime::distributional;
    knots.knot_times.push_back(0.0);
    knots.knot_values.push_back(0.0);
    const double scale = eps * eps;
    double elapsed = 0.0;
    double w = 0.0;
    for (;;) {
        const double xi = scale * dist.sample(rng);
        const double next = elapsed + xi;
        if (!(next < 1.0)) break;
        if (!(next > elapsed)) throw NumericError("sample_knot_sequence: eps too small for double resolution");
        w += rng.gaussian() * std::sqrt(xi);
        elapsed = next;
        knots.knot_times.push_back(elapsed);
        knots.knot_values.push_back(w);
    }
    w += rng.gaussian() * std::sqrt(1.0 - elapsed);
    knots.knot_times.push_back(1.0);
    knots.knot_values.push_back(w);
    return knots;
}

double interpolate_brownian(const KnotPath& knots, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("interpolate_brownian: t must lie in [0, 1]");
    const auto& times = knots.knot_times;
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const auto j = static_cast<std::size_t>(it - times.begin());
    if (times[j] == t) return knots.knot_values[j];
    const double w0 = knots.knot_values[j - 1];
    const double w1 = knots.knot_values[j];
    const double fraction = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return w0 + (w1 - w0) * fraction;
}

}  // namespace freeknot
