#include "priorest/coin_bound.hpp"

#include <cmath>

namespace priorest {

namespace {

struct CoinTerms {
  BigInt plus;   ///< numerator of (1+gamma) over 2b, i.e. b + a
  BigInt minus;  ///< b - a
  BigInt half;   ///< 2b
};

CoinTerms coin_terms(const Rational& gamma) {
  if (!(gamma > 0 && gamma < 1)) {
    throw ValidationError("coin bias gamma must lie in (0, 1)");
  }
  const BigInt a = boost::multiprecision::numerator(gamma);
  const BigInt b = boost::multiprecision::denominator(gamma);
  return CoinTerms{b + a, b - a, 2 * b};
}

// sum_s C(n,s) f(s) u^s v^{n-s} style sums share the power tables.
template <typename Pick>
Rational binomial_sum(const Rational& gamma, int n, Pick pick) {
  if (n < 0) {
    throw ValidationError("number of tosses must be nonnegative");
  }
  const CoinTerms c = coin_terms(gamma);
  std::vector<BigInt> up(static_cast<std::size_t>(n) + 1);
  std::vector<BigInt> down(static_cast<std::size_t>(n) + 1);
  up[0] = 1;
  down[0] = 1;
  for (int i = 1; i <= n; ++i) {
    up[static_cast<std::size_t>(i)] = up[static_cast<std::size_t>(i) - 1] * c.plus;
    down[static_cast<std::size_t>(i)] = down[static_cast<std::size_t>(i) - 1] * c.minus;
  }
  BigInt total = 0;
  BigInt choose = 1;
  for (int s = 0; s <= n; ++s) {
    // Likelihood of s heads under the high and the low hypothesis, times (2b)^n.
    const BigInt high = up[static_cast<std::size_t>(s)] * down[static_cast<std::size_t>(n - s)];
    const BigInt low = down[static_cast<std::size_t>(s)] * up[static_cast<std::size_t>(n - s)];
    total += choose * pick(s, n, high, low);
    choose = choose * (n - s) / (s + 1);
  }
  BigInt denom = 2 * boost::multiprecision::pow(c.half, static_cast<unsigned>(n));
  return Rational(total, denom);
}

}  // namespace

Rational exact_bayes_error(const Rational& gamma, int n) {
  return binomial_sum(gamma, n, [](int, int, const BigInt& high, const BigInt& low) {
    return high < low ? high : low;
  });
}

Rational majority_error(const Rational& gamma, int n) {
  // Wrong under the high hypothesis when heads < n/2; under the low one when
  // heads >= n/2.
  return binomial_sum(gamma, n, [](int s, int n_, const BigInt& high, const BigInt& low) {
    return 2 * s >= n_ ? low : high;
  });
}

double log_coin_floor(double gamma, int n) { return -std::log(32.0) - 128.0 * gamma * gamma * n / 3.0; }

std::vector<CoinBoundRow> coin_bound_table(const std::vector<Rational>& gammas, const std::vector<int>& ns) {
  std::vector<CoinBoundRow> rows;
  rows.reserve(gammas.size() * ns.size());
  for (const Rational& g : gammas) {
    for (int n : ns) {
      CoinBoundRow row;
      row.gamma = g;
      row.n = n;
      row.bayes_error = exact_bayes_error(g, n);
      row.log_bayes_error = log_of(row.bayes_error);
      row.log_floor = log_coin_floor(to_double(g), n);
      row.pass = row.log_bayes_error >= row.log_floor;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace priorest
