#pragma once

#include <cmath>
#include <limits>

namespace treepin {

// Streaming log-sum-exp with running-max subtraction.  Accumulation order is
// part of the numeric contract: callers always feed terms in a fixed order
// (ascending child index, ascending k) so results are bit-stable.
class RunningLse {
  public:
    void add(double x) {
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = max_ == -std::numeric_limits<double>::infinity()
                       ? 1.0
                       : sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }

    double value() const {
        if (max_ == -std::numeric_limits<double>::infinity()) return max_;
        return max_ + std::log(sum_);
    }

  private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

inline double lse2(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace treepin
