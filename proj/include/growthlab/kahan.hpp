#pragma once

#include <cmath>

namespace growthlab {

/// Neumaier-compensated accumulator. The correction term also absorbs the case
/// |addend| > |sum|, which plain Kahan summation mishandles.
class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double init) : sum_(init) {}

  KahanSum& operator+=(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
    return *this;
  }

  double value() const { return sum_ + comp_; }
  operator double() const { return value(); }

  void reset(double v = 0.0) {
    sum_ = v;
    comp_ = 0.0;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace growthlab
