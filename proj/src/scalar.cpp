#include "priorest/scalar.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace priorest {

namespace {

// Top 62 bits of |x| as a double times 2^shift.
double log_magnitude(const BigInt& x) {
  if (x <= 0) {
    throw ValidationError("log of a nonpositive integer");
  }
  const std::size_t bits = boost::multiprecision::msb(x) + 1;
  if (bits <= 62) {
    return std::log(static_cast<double>(x.convert_to<std::uint64_t>()));
  }
  const std::size_t shift = bits - 62;
  const BigInt top = x >> shift;
  return std::log(static_cast<double>(top.convert_to<std::uint64_t>())) +
         static_cast<double>(shift) * std::log(2.0);
}

}  // namespace

double to_double(const Rational& x) {
  const BigInt num = boost::multiprecision::numerator(x);
  const BigInt den = boost::multiprecision::denominator(x);
  if (num == 0) {
    return 0.0;
  }
  const BigInt anum = num < 0 ? BigInt(-num) : num;
  if (boost::multiprecision::msb(anum) < 1000 && boost::multiprecision::msb(den) < 1000) {
    return x.convert_to<double>();
  }
  const double sign = num < 0 ? -1.0 : 1.0;
  return sign * std::exp(log_magnitude(anum) - log_magnitude(den));
}

double log_of(const BigInt& x) { return log_magnitude(x); }

double log_of(const Rational& x) {
  if (x <= 0) {
    throw ValidationError("log of a nonpositive rational");
  }
  return log_magnitude(boost::multiprecision::numerator(x)) -
         log_magnitude(boost::multiprecision::denominator(x));
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) {
    return 0;
  }
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) {
    throw ValidationError("empty numeric field");
  }
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    try {
      const BigInt num(s.substr(0, slash));
      const BigInt den(s.substr(slash + 1));
      if (den == 0) {
        throw ValidationError("zero denominator in '" + s + "'");
      }
      return Rational(num, den);
    } catch (const std::runtime_error&) {
      throw ValidationError("malformed rational '" + s + "'");
    }
  }

  // Decimal with optional exponent, parsed digit by digit so "0.1" is 1/10.
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  BigInt digits = 0;
  long scale = 0;
  bool any = false;
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seen_point) --scale;
      any = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any) {
    throw ValidationError("malformed number '" + s + "'");
  }
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') {
      throw ValidationError("malformed number '" + s + "'");
    }
    char* end = nullptr;
    const std::string exp_part = s.substr(i + 1);
    const long e = std::strtol(exp_part.c_str(), &end, 10);
    if (exp_part.empty() || *end != '\0') {
      throw ValidationError("malformed exponent in '" + s + "'");
    }
    scale += e;
  }
  Rational value(digits);
  if (scale > 0) {
    value *= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale)));
  } else if (scale < 0) {
    value /= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-scale)));
  }
  return negative ? Rational(-value) : value;
}

double parse_double(std::string_view text) {
  const std::string s(text);
  if (s.find('/') != std::string::npos) {
    return to_double(parse_rational(s));
  }
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == s.c_str() || (end && *end != '\0')) {
    throw ValidationError("malformed number '" + s + "'");
  }
  return value;
}

std::string format_rational(const Rational& x) {
  const BigInt num = boost::multiprecision::numerator(x);
  const BigInt den = boost::multiprecision::denominator(x);
  if (den == 1) {
    return num.str();
  }
  return num.str() + "/" + den.str();
}

std::string format_double(double x) {
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace priorest
