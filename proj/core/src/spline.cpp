#include "freeknot/spline.hpp"

#include <algorithm>

#include "freeknot/errors.hpp"

namespace freeknot {

SplinePath::SplinePath(double initial_value, std::vector<Segment> segments)
    : initial_value_(initial_value), segments_(std::move(segments)) {
    if (segments_.empty()) throw ConfigError("SplinePath: no segments");
    if (segments_.front().t_start != 0.0 || segments_.back().t_end != 1.0)
        throw ConfigError("SplinePath: segments must cover (0, 1]");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (!(segments_[i].t_start < segments_[i].t_end)) throw ConfigError("SplinePath: empty segment");
        if (i > 0 && segments_[i].t_start != segments_[i - 1].t_end)
            throw ConfigError("SplinePath: segments are not contiguous");
    }
}

std::size_t SplinePath::segment_index(double t) const {
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("SplinePath: segment lookup needs t in (0, 1]");
    const auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                                     [](const Segment& s, double value) { return s.t_end < value; });
    return static_cast<std::size_t>(it - segments_.begin());
}

double SplinePath::operator()(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("SplinePath: t must lie in [0, 1]");
    if (t == 0.0) return initial_value_;
    const Segment& s = segments_[segment_index(t)];
    return t == s.t_end ? s.y_end : s.at(t);
}

double SplinePath::right_limit(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("SplinePath: t must lie in [0, 1]");
    if (t == 1.0) return segments_.back().y_end;
    if (t == 0.0) return segments_.front().y_start;
    const std::size_t i = segment_index(t);
    const Segment& s = segments_[i];
    if (t == s.t_end) return segments_[i + 1].y_start;
    return s.at(t);
}

bool SplinePath::is_continuous() const {
    for (std::size_t i = 1; i < segments_.size(); ++i)
        if (segments_[i].y_start != segments_[i - 1].y_end) return false;
    return true;
}

}  // namespace freeknot
