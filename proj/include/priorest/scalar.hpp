#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace priorest {

// Exact arithmetic for small instances. Expression templates are off so the
// type behaves like an ordinary value type inside Eigen containers.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Precondition or input-format failure (CLI exit code 1).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// An enumeration or memory budget would be exceeded (CLI exit code 2).
class BudgetError : public Error {
public:
  using Error::Error;
};

inline double to_double(double x) { return x; }
double to_double(const Rational& x);

/// Exact conversion: a finite double is a dyadic rational.
template <typename Scalar>
Scalar from_double(double x) {
  if constexpr (is_exact_v<Scalar>) {
    return Rational(x);
  } else {
    return x;
  }
}

/// Slack used when comparing masses: zero for exact scalars.
template <typename Scalar>
double mass_tolerance() {
  return is_exact_v<Scalar> ? 0.0 : 1e-12;
}

template <typename Scalar>
Scalar abs_value(const Scalar& x) {
  return x < Scalar(0) ? Scalar(-x) : x;
}

/// Binomial coefficient as an exact integer in a 64-bit word.
std::uint64_t binomial(int n, int k);

/// Natural log of a positive exact rational, accurate to double precision
/// even when numerator and denominator overflow a double.
double log_of(const Rational& x);
double log_of(const BigInt& x);

/// "p/q", "-p/q", integers, and plain decimals ("0.05", "1e-3") parse exactly.
Rational parse_rational(std::string_view text);
/// Decimal via strtod; "p/q" via exact division.
double parse_double(std::string_view text);

std::string format_rational(const Rational& x);
std::string format_double(double x);

template <typename Scalar>
std::string format_scalar(const Scalar& x) {
  if constexpr (is_exact_v<Scalar>) {
    return format_rational(x);
  } else {
    return format_double(x);
  }
}

template <typename Scalar>
Scalar parse_scalar(std::string_view text) {
  if constexpr (is_exact_v<Scalar>) {
    return parse_rational(text);
  } else {
    return parse_double(text);
  }
}

}  // namespace priorest
