#pragma once

#include "priorest/scalar.hpp"

#include <vector>

namespace priorest {

/// Bayes error of telling p = (1+gamma)/2 from p = (1-gamma)/2 with n
/// tosses under a uniform prior on the two hypotheses:
/// (1/2) sum_s C(n,s) min(p+^s p-^{n-s}, p-^s p+^{n-s}). Exact.
Rational exact_bayes_error(const Rational& gamma, int n);

/// Error of the majority vote with ties sent to (1+gamma)/2. Exact.
Rational majority_error(const Rational& gamma, int n);

/// log of (1/32) exp(-128 gamma^2 n / 3).
double log_coin_floor(double gamma, int n);
inline double coin_floor(double gamma, int n) { return std::exp(log_coin_floor(gamma, n)); }

struct CoinBoundRow {
  Rational gamma;
  int n = 0;
  Rational bayes_error;
  double log_bayes_error = 0.0;
  double log_floor = 0.0;
  bool pass = false;
};

/// One row per (gamma, n), gammas outer. The comparison is made on logs so
/// floors far below the double range still compare correctly.
std::vector<CoinBoundRow> coin_bound_table(const std::vector<Rational>& gammas, const std::vector<int>& ns);

}  // namespace priorest
