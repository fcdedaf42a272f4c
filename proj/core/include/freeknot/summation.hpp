#pragma once

#include <cmath>

namespace freeknot {

/// Neumaier compensated sum. Results depend only on the order of add() calls.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            compensation_ += (sum_ - t) + v;
        else
            compensation_ += (v - t) + sum_;
        sum_ = t;
    }

    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace freeknot
