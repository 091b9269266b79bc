#pragma once

// Double-double arithmetic built from error-free transformations. Unit
// roundoff is about 2^-106, enough for residuals at u_r <= u^2 when u is double.

#include <cmath>

#include "spai_ir/precision.hpp"

namespace spai_ir {

namespace eft {

// s + e == a + b exactly
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// requires |a| >= |b|
inline void fast_two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  e = b - (s - a);
}

// p + e == a * b exactly
inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

}  // namespace eft

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double h) : hi(h), lo(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
  double to_double() const { return hi + lo; }
};

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
  double s, e, t, f;
  eft::two_sum(a.hi, b.hi, s, e);
  eft::two_sum(a.lo, b.lo, t, f);
  e += t;
  eft::fast_two_sum(s, e, s, e);
  e += f;
  eft::fast_two_sum(s, e, s, e);
  return {s, e};
}

inline DoubleDouble operator-(DoubleDouble a) { return {-a.hi, -a.lo}; }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
  double p, e;
  eft::two_prod(a.hi, b.hi, p, e);
  e += a.hi * b.lo + a.lo * b.hi;
  eft::fast_two_sum(p, e, p, e);
  return {p, e};
}

inline DoubleDouble operator/(DoubleDouble a, DoubleDouble b) {
  const double q1 = a.hi / b.hi;
  DoubleDouble r = a - b * DoubleDouble(q1);
  const double q2 = r.hi / b.hi;
  r = r - b * DoubleDouble(q2);
  const double q3 = r.hi / b.hi;
  double s, e;
  eft::fast_two_sum(q1, q2, s, e);
  return DoubleDouble(s, e) + DoubleDouble(q3);
}

inline DoubleDouble& operator+=(DoubleDouble& a, DoubleDouble b) { return a = a + b; }
inline DoubleDouble& operator-=(DoubleDouble& a, DoubleDouble b) { return a = a - b; }
inline DoubleDouble& operator*=(DoubleDouble& a, DoubleDouble b) { return a = a * b; }
inline DoubleDouble& operator/=(DoubleDouble& a, DoubleDouble b) { return a = a / b; }

inline bool operator<(DoubleDouble a, DoubleDouble b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DoubleDouble a, DoubleDouble b) { return b < a; }
inline bool operator==(DoubleDouble a, DoubleDouble b) { return a.hi == b.hi && a.lo == b.lo; }

inline DoubleDouble abs(DoubleDouble a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline DoubleDouble sqrt(DoubleDouble a) {
  if (a.hi < 0.0) throw Error(ErrorKind::Domain, "sqrt of negative value");
  if (a.hi == 0.0) return {};
  const double x = std::sqrt(a.hi);
  // One Newton step in double-double.
  const DoubleDouble xx = DoubleDouble(x) * DoubleDouble(x);
  return DoubleDouble(x) + DoubleDouble((a - xx).hi * (0.5 / x));
}

inline bool isfinite(DoubleDouble a) { return std::isfinite(a.hi) && std::isfinite(a.lo); }

// Running sum of products in a given precision. Half/single/double round
// after every product and every addition; QuadEmulated keeps the sum and the
// products exactly in double-double.
class Accumulator {
 public:
  explicit Accumulator(Precision p) : p_(p) {}

  void add(double x) {
    if (p_ == kQuad) {
      dd_ += DoubleDouble(x);
    } else {
      sum_ = fl::add(sum_, x, p_);
    }
  }

  void add_product(double a, double b) {
    if (p_ == kQuad) {
      double prod, err;
      eft::two_prod(a, b, prod, err);
      dd_ += DoubleDouble(prod, err);
    } else {
      sum_ = fl::add(sum_, fl::mul(a, b, p_), p_);
    }
  }

  double value() const { return p_ == kQuad ? dd_.to_double() : sum_; }
  DoubleDouble extended() const { return p_ == kQuad ? dd_ : DoubleDouble(sum_); }

 private:
  Precision p_;
  double sum_ = 0.0;
  DoubleDouble dd_{};
};

}  // namespace spai_ir
