#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace brownpoly {

/// log(0). Empty simplices carry this value; every log-space operation here
/// treats it as absorbing.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)).
inline double log_add(double a, double b)
{
    if (a < b) std::swap(a, b);
    if (b == kLogZero) return a;
    return a + std::log1p(std::exp(b - a));
}

/// One-pass log-sum-exp accumulator with running rescaling.
class LogSumAccumulator {
  public:
    void add(double v)
    {
        if (v == kLogZero) return;
        if (v <= max_) {
            sum_ += std::exp(v - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - v) + 1.0;
            max_ = v;
        }
    }

    double value() const { return max_ == kLogZero ? kLogZero : max_ + std::log(sum_); }

  private:
    double max_ = kLogZero;
    double sum_ = 0.0;
};

/// log sum_i exp(values[i]); kLogZero for an empty sequence.
inline double logsumexp_stream(std::span<const double> values)
{
    LogSumAccumulator acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

} // namespace brownpoly
