#pragma once

namespace binoquad {

// Compensated (Kahan) accumulator. Dyadic cell masses span many orders of
// magnitude for skewed alpha, so plain summation loses digits.
struct KahanSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double value) {
    const double y = value - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  }

  KahanSum& operator+=(double value) {
    add(value);
    return *this;
  }

  double value() const { return sum; }
};

}  // namespace binoquad
