#pragma once

namespace pharmap {

/// Kahan compensated accumulator. Reported figures are summed with this in a
/// fixed traversal order, which keeps them reproducible to the last bit.
class CompensatedSum {
public:
  void add(double x) {
    double y = x - compensation_;
    double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }

  double value() const { return sum_; }

private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace pharmap
