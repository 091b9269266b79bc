#pragma once

// Software emulation of IEEE half/single/double and a double-double
// "quadruple" format. Every scalar operation is evaluated in native double and
// then rounded to the target format (round-to-nearest, ties-to-even,
// subnormals kept, overflow to infinity).

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "spai_ir/error.hpp"

namespace spai_ir {

enum class Format { Half, Single, Double, QuadEmulated };

struct Precision {
  Format format = Format::Double;

  constexpr double unit_roundoff() const {
    switch (format) {
      case Format::Half: return 0x1p-11;
      case Format::Single: return 0x1p-24;
      case Format::Double: return 0x1p-53;
      case Format::QuadEmulated: return 0x1p-106;
    }
    return 0x1p-53;
  }

  constexpr double max_finite() const {
    switch (format) {
      case Format::Half: return 65504.0;
      case Format::Single: return static_cast<double>(std::numeric_limits<float>::max());
      default: return std::numeric_limits<double>::max();
    }
  }

  constexpr double min_normal() const {
    switch (format) {
      case Format::Half: return 0x1p-14;
      case Format::Single: return static_cast<double>(std::numeric_limits<float>::min());
      default: return std::numeric_limits<double>::min();
    }
  }

  // Significand bits including the implicit bit.
  constexpr int digits() const {
    switch (format) {
      case Format::Half: return 11;
      case Format::Single: return 24;
      case Format::Double: return 53;
      case Format::QuadEmulated: return 106;
    }
    return 53;
  }

  constexpr bool operator==(const Precision&) const = default;
};

inline constexpr Precision kHalf{Format::Half};
inline constexpr Precision kSingle{Format::Single};
inline constexpr Precision kDouble{Format::Double};
inline constexpr Precision kQuad{Format::QuadEmulated};

inline char to_char(Precision p) {
  switch (p.format) {
    case Format::Half: return 'h';
    case Format::Single: return 's';
    case Format::Double: return 'd';
    case Format::QuadEmulated: return 'q';
  }
  return '?';
}

inline std::string to_name(Precision p) {
  switch (p.format) {
    case Format::Half: return "half";
    case Format::Single: return "single";
    case Format::Double: return "double";
    case Format::QuadEmulated: return "quad";
  }
  return "unknown";
}

inline Precision parse_precision(std::string_view s) {
  if (s == "h" || s == "half") return kHalf;
  if (s == "s" || s == "single") return kSingle;
  if (s == "d" || s == "double") return kDouble;
  if (s == "q" || s == "quad") return kQuad;
  throw Error(ErrorKind::InvalidArgument, "unknown precision '" + std::string(s) + "'");
}

namespace detail {

// Round a finite nonzero double to a binary format with `digits` significand
// bits, minimum normal exponent `emin` and largest finite value `max_finite`.
inline double round_to_format(double x, int digits, int emin, int emax, double max_finite) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  auto bits = std::bit_cast<std::uint64_t>(x);
  const int e = static_cast<int>((bits >> 52) & 0x7ff) - 1023;
  if (e >= emin && e <= emax) {
    // Normal range of the target: clear the low 53-digits bits with RNE. A
    // carry out of the significand bumps the exponent field, which is exactly
    // the right answer.
    const int drop = 53 - digits;
    const std::uint64_t unit = std::uint64_t{1} << drop;
    const std::uint64_t lsb = (bits >> drop) & 1u;
    bits += (unit >> 1) - 1 + lsb;
    bits &= ~(unit - 1);
    const double y = std::bit_cast<double>(bits);
    if (std::fabs(y) > max_finite) return std::copysign(std::numeric_limits<double>::infinity(), x);
    return y;
  }
  if (e > emax) return std::copysign(std::numeric_limits<double>::infinity(), x);
  // Subnormal range of the target: fixed quantum 2^(emin - digits + 1).
  const int q = emin - (digits - 1);
  const double scaled = std::ldexp(x, -q);
  const double r = std::nearbyint(scaled);
  return std::copysign(std::ldexp(r, q), x);
}

}  // namespace detail

inline double round_scalar(double x, Precision p) {
  switch (p.format) {
    case Format::Half: return detail::round_to_format(x, 11, -14, 15, 65504.0);
    case Format::Single:
      // Past the rounding boundary of FLT_MAX the cast itself is undefined.
      if (std::fabs(x) >= 0x1.ffffffp127) return std::copysign(std::numeric_limits<double>::infinity(), x);
      return static_cast<double>(static_cast<float>(x));
    case Format::Double:
    case Format::QuadEmulated: return x;
  }
  return x;
}

enum class Op { Add, Sub, Mul, Div, Sqrt };

// For half and single the native double result of +,-,*,/,sqrt on operands
// representable in the target is rounded only once more, and double carries
// at least 2*digits+2 bits, so the two-step rounding equals a correctly
// rounded result. QuadEmulated returns the correctly rounded double of the
// exact result; extended accumulation lives in Accumulator and DoubleDouble.
inline double fl_op(Op op, double a, double b, Precision p) {
  double r = 0.0;
  switch (op) {
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div: r = a / b; break;
    case Op::Sqrt:
      if (a < 0.0) throw Error(ErrorKind::Domain, "sqrt of negative value");
      r = std::sqrt(a);
      break;
  }
  return round_scalar(r, p);
}

namespace fl {

inline double add(double a, double b, Precision p) { return round_scalar(a + b, p); }
inline double sub(double a, double b, Precision p) { return round_scalar(a - b, p); }
inline double mul(double a, double b, Precision p) { return round_scalar(a * b, p); }
inline double div(double a, double b, Precision p) { return round_scalar(a / b, p); }
inline double sqrt(double a, Precision p) { return fl_op(Op::Sqrt, a, 0.0, p); }

}  // namespace fl

}  // namespace spai_ir
