#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace freeknot {

/// Affine piece on the right-closed interval (t_start, t_end].
struct Segment {
    double t_start;
    double t_end;
    double y_start;  // limit from the right at t_start
    double y_end;    // value at t_end

    double at(double t) const { return y_start + (y_end - y_start) * ((t - t_start) / (t_end - t_start)); }
};

/// Piecewise-linear function on [0, 1] built from right-closed segments.
///
/// Jumps between consecutive segments are allowed: at a breakpoint tau the
/// function takes the left segment's end value, and the right segment's
/// start value is its limit from the right. At t = 0 the stored initial
/// value is returned.
class SplinePath {
public:
    /// Segments must be contiguous, cover (0, 1] and satisfy t_start < t_end.
    SplinePath(double initial_value, std::vector<Segment> segments);

    double initial_value() const { return initial_value_; }
    std::span<const Segment> segments() const { return segments_; }
    std::size_t size() const { return segments_.size(); }

    /// Value at t in [0, 1]; DomainError outside.
    double operator()(double t) const;

    /// lim_{s -> t+}; at t = 1 this is the value at 1.
    double right_limit(double t) const;

    /// Index of the segment containing t in (0, 1].
    std::size_t segment_index(double t) const;

    bool is_continuous() const;

private:
    double initial_value_;
    std::vector<Segment> segments_;
};

}  // namespace freeknot
