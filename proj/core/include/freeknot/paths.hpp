#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "freeknot/random.hpp"
#include "freeknot/tau11.hpp"

namespace freeknot {

/// Brownian path sampled at t_i = i/n, i = 0..n, on the unit interval.
class GridPath {
public:
    /// Takes ownership of W(t_0), ..., W(t_n). Requires n >= 1 and W(0) = 0.
    explicit GridPath(std::vector<double> values);

    std::size_t steps() const { return values_.size() - 1; }
    double step() const { return 1.0 / static_cast<double>(steps()); }
    /// Grid time i/n; exactly 1 at i = n.
    double time(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(steps()); }

    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

    /// Largest absolute one-step increment.
    double max_increment() const;

private:
    std::vector<double> values_;
};

/// Independent N(0, 1/n) increments starting from 0. Throws DomainError for n = 0.
GridPath sample_grid_path(std::size_t n, RandomStream& rng);

enum class KnotRegime { distributional, grid_oracle };

/// Free-knot skeleton 0 = tau_0 < tau_1 < ... < tau_N < tau_{N+1} = 1 with the
/// Brownian values at the knots. N is the number of interior knots.
struct KnotPath {
    double eps = 0.0;
    std::vector<double> knot_times;
    std::vector<double> knot_values;
    KnotRegime regime = KnotRegime::distributional;
    /// Grid index of every knot (grid-oracle regime only; empty otherwise).
    std::vector<std::size_t> grid_indices;

    std::size_t n_knots() const { return knot_times.size() - 2; }
    std::size_t intervals() const { return knot_times.size() - 1; }

    /// Length of interval j (1-based), tau_j - tau_{j-1}.
    double interval_length(std::size_t j) const { return knot_times[j] - knot_times[j - 1]; }
    /// (W(tau_j) - W(tau_{j-1})) / sqrt(tau_j - tau_{j-1}).
    double normalized_increment(std::size_t j) const;

    /// Throws ConfigError if the structural invariants do not hold.
    void validate() const;
};

/// Signed residual of point (index, value) from the chord through
/// (i0, v0) and (i1, v1). Shared by every deviation routine so that they
/// agree bit for bit.
inline double chord_residual(std::size_t i0, double v0, std::size_t i1, double v1, std::size_t index,
                             double value) {
    const double fraction = static_cast<double>(index - i0) / static_cast<double>(i1 - i0);
    return value - (v0 + (v1 - v0) * fraction);
}

/// max_{i0 < i < i1} |W_i - chord(t_i)| by direct scan; 0 when i1 = i0 + 1.
/// Throws DomainError unless 0 <= i0 < i1 <= n.
double max_chord_deviation(const GridPath& path, std::size_t i0, std::size_t i1);

/// Same quantity via the convex hull of the interior points.
double max_chord_deviation_hull(const GridPath& path, std::size_t i0, std::size_t i1);

/// Streaming maximum chord deviation.
///
/// Holds the upper and lower convex hulls of the points pushed since the
/// last reset (anchor included). The largest residual above (below) a chord
/// is attained at a vertex of the upper (lower) hull, and the residual is
/// concave along the hull, so each query is a binary search.
class ChordDeviationTracker {
public:
    void reset(std::size_t anchor_index, double anchor_value);

    /// Adds a point; indices must increase strictly.
    void push(std::size_t index, double value);

    /// Max |residual| of the pushed points from the chord anchor -> (index, value).
    double max_deviation(std::size_t index, double value) const;

private:
    struct Point {
        std::size_t index;
        double value;
    };

    template <typename Residual>
    static double peak(const std::vector<Point>& hull, Residual residual);

    std::size_t anchor_index_ = 0;
    double anchor_value_ = 0.0;
    std::vector<Point> upper_;
    std::vector<Point> lower_;
};

enum class ResolutionGuard { enforce, waive };

/// Minimum ratio eps^2 / h accepted by grid detection.
inline constexpr double resolution_guard_ratio = 50.0;

struct KnotSearch {
    std::size_t index;  // detected knot, or n if the horizon was reached first
    bool exceeded;      // deviation strictly above eps at index
};

/// First grid index t > start with max_chord_deviation(start, t) > eps.
KnotSearch next_knot_on_grid(const GridPath& path, std::size_t start, double eps);

/// Grid version of the stopping-time construction: each knot is the first
/// grid time at which the chord from the previous knot misses the path by
/// more than eps. Deviations exactly equal to eps do not trigger a knot.
///
/// Throws DomainError for eps <= 0 and ConfigError when h > eps^2/50 unless
/// the guard is waived.
KnotPath detect_knots_on_grid(const GridPath& path, double eps,
                              ResolutionGuard guard = ResolutionGuard::enforce);

/// Quadratic-time reference implementation of detect_knots_on_grid.
KnotPath detect_knots_on_grid_naive(const GridPath& path, double eps,
                                    ResolutionGuard guard = ResolutionGuard::enforce);

/// Distributional knot sampler: interval lengths eps^2 * tau(1,1) i.i.d.,
/// normalized increments i.i.d. N(0,1) independent of the lengths. The final
/// increment over [tau_N, 1] is drawn N(0, 1 - tau_N).
KnotPath sample_knot_sequence(double eps, RandomStream& rng, const Tau11Dist& dist = Tau11Dist{});

/// Piecewise-linear interpolant of W at the knots, evaluated at t in [0, 1].
double interpolate_brownian(const KnotPath& knots, double t);

}  // namespace freeknot
