#pragma once

#include <cmath>

namespace gtab {

/// Order-independent accumulator for doubles of moderate magnitude.
///
/// Every term is truncated to a 2^-100 fixed-point grid and added as a 128-bit
/// integer. Integer addition is associative, so the result is bitwise
/// identical for any summation order or thread partition. Terms must satisfy
/// |x| < 2^26 and the running total must stay below 2^26 in magnitude.
class ExactSum {
 public:
  static constexpr int kFracBits = 100;

  void add(double x) { acc_ += static_cast<__int128>(std::ldexp(x, kFracBits)); }

  ExactSum& operator+=(const ExactSum& other) {
    acc_ += other.acc_;
    return *this;
  }

  double value() const { return std::ldexp(static_cast<double>(acc_), -kFracBits); }

 private:
  __int128 acc_ = 0;
};

}  // namespace gtab
