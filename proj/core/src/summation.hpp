#pragma once

#include <cmath>

namespace gdl::detail {

// Neumaier-compensated running sum.
struct Summation {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
  // (sum + comp) / n with the remainder folded back in, so the mean is
  // rounded once rather than twice.
  double mean(double n) const {
    double q = sum / n;
    double r = std::fma(-q, n, sum) + comp;
    return q + r / n;
  }
};

}  // namespace gdl::detail
