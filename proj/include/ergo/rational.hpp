#ifndef ERGO_RATIONAL_HPP
#define ERGO_RATIONAL_HPP

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <type_traits>

#include "ergo/errors.hpp"

namespace ergo {

// Exact numeric mode.  All stationarity verdicts are computed in this type so
// that "deviation is exactly zero" is a meaningful statement.
using Rational = mpq_class;

template <class T>
inline constexpr bool is_rational_v = std::is_same_v<T, Rational>;

inline double to_double(const Rational& r) { return r.get_d(); }
inline double to_double(double x) { return x; }

// Accepts "p/q" or a bare integer "p"; normalizes sign and reduces.
Rational parse_rational(const std::string& text);

// The mpq_class(num, den) constructor does not reduce; always build fractions
// through this so comparisons stay reliable.
inline Rational rational_of(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& r);

inline Rational abs_value(const Rational& r) { return abs(r); }
inline double abs_value(double x) { return std::fabs(x); }

// Tolerance used when checking that float-mode weights sum to one.
inline constexpr double kFloatSumTolerance = 1e-12;

template <class T>
bool sums_to_one(const T& sum) {
  if constexpr (is_rational_v<T>) {
    return sum == 1;
  } else {
    return std::fabs(sum - 1.0) <= kFloatSumTolerance;
  }
}

}  // namespace ergo

#endif
