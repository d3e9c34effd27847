#pragma once

// Exact floating-point accumulation using non-overlapping expansions
// (Shewchuk, "Adaptive Precision Floating-Point Arithmetic", 1997).
// The represented value is the exact real sum of everything added; value()
// rounds it once. Requires IEEE binary64 with round-to-nearest and no
// contraction of a*b+c (the build sets -ffp-contract=off).

#include <cmath>
#include <span>
#include <vector>

namespace fmx {

class ExactSum {
 public:
  ExactSum() = default;

  void add(double x) {
    if (x == 0.0) return;
    grow(x);
  }

  // Adds a*b exactly.
  void add_product(double a, double b) {
    const double p = a * b;
    const double e = std::fma(a, b, -p);
    add(e);
    add(p);
  }

  void add(const ExactSum& other) {
    for (double x : other.parts_) add(x);
  }

  void subtract(const ExactSum& other) {
    for (double x : other.parts_) add(-x);
  }

  // Sum of components from smallest to largest.
  double value() const {
    double s = 0.0;
    for (double x : parts_) s += x;
    return s;
  }

  bool is_zero() const { return parts_.empty(); }
  std::span<const double> parts() const { return parts_; }

  friend ExactSum operator-(ExactSum a, const ExactSum& b) {
    a.subtract(b);
    return a;
  }

  // Exact equality of the represented reals.
  friend bool operator==(const ExactSum& a, const ExactSum& b) { return (a - b).is_zero(); }

 private:
  static void two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    err = (a - av) + (b - bv);
  }

  // Grow-Expansion with zero elimination: keeps parts_ non-overlapping and
  // sorted by increasing magnitude.
  void grow(double b) {
    std::vector<double> next;
    next.reserve(parts_.size() + 1);
    double q = b;
    for (double e : parts_) {
      double s, h;
      two_sum(q, e, s, h);
      if (h != 0.0) next.push_back(h);
      q = s;
    }
    if (q != 0.0) next.push_back(q);
    parts_ = std::move(next);
  }

  std::vector<double> parts_;
};

}  // namespace fmx
