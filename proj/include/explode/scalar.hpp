#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "explode/error.hpp"

namespace explode {

/// Exact arithmetic scalar used in rational mode. Unbounded numerator and
/// denominator, always kept in lowest terms.
using rational = boost::multiprecision::cpp_rational;

/// Per-scalar policy. Rational mode compares exactly and ignores tolerances;
/// float mode compares within the tolerance supplied at the call site.
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<rational> {
  static constexpr bool exact = true;
  static rational from_fraction(long long num, long long den) { return rational(num, den); }
  static double to_double(const rational& x) { return x.template convert_to<double>(); }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double from_fraction(long long num, long long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double to_double(double x) { return x; }
};

template <class S>
S frac(long long num, long long den) {
  return scalar_traits<S>::from_fraction(num, den);
}

template <class S>
double to_double(const S& x) {
  return scalar_traits<S>::to_double(x);
}

template <class S>
S abs_value(const S& x) {
  return x < S(0) ? S(-x) : x;
}

/// Float-mode tolerance for probability-vector normalization checks;
/// rational mode ignores tolerances entirely.
inline constexpr double kSumTolerance = 1e-12;

/// Equality up to `tol` in float mode, exact equality in rational mode.
template <class S>
bool near_equal(const S& a, const S& b, double tol) {
  if constexpr (scalar_traits<S>::exact) {
    (void)tol;
    return a == b;
  } else {
    return std::abs(a - b) <= tol;
  }
}

/// Parses "p/q" or "p". Accepted by both modes; float mode divides.
template <class S>
S parse_fraction_string(std::string_view text) {
  auto slash = text.find('/');
  auto parse_int = [&](std::string_view part) -> long long {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    require(ec == std::errc() && ptr == part.data() + part.size(), errc::parse_error,
            "invalid integer '" + std::string(part) + "'");
    return value;
  };
  if (slash == std::string_view::npos) return S(parse_int(text));
  long long num = parse_int(text.substr(0, slash));
  long long den = parse_int(text.substr(slash + 1));
  require(den != 0, errc::parse_error, "zero denominator in '" + std::string(text) + "'");
  return frac<S>(num, den);
}

/// Exact conversion of the binary value of a double. Dyadic literals such as
/// 0.5 or 0.375 round-trip exactly; a literal like 0.1 becomes the binary
/// fraction the double actually holds.
inline rational rational_from_double(double x) { return rational(x); }

inline std::string format_scalar(const rational& x) {
  const auto& num = numerator(x);
  const auto& den = denominator(x);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

/// Shortest round-trip decimal form, locale independent.
inline std::string format_scalar(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace explode
