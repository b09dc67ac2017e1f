#pragma once

#include "priorest/prior_family.hpp"
#include "priorest/rng.hpp"
#include "priorest/task_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace priorest {

inline constexpr std::size_t kOutcomeBudget = 10'000'000;

/// Key of an outcome tuple: x_index * 2^k + ybits, where x_index = sum x_j m^j
/// over 0-based points and bit j of ybits is set when y_j = +1.
std::uint64_t outcome_key(std::span<const int> xs, std::span<const int> ys, int m);

/// Decodes a key back into 0-based points and +1/-1 labels.
void decode_outcome_key(std::uint64_t key, int m, int k, std::vector<int>& xs, std::vector<int>& ys);

/// Throws BudgetError when (2m)^k exceeds the budget.
void check_outcome_budget(int m, int k, std::size_t budget);

/// Law of Z_k = ((X_1,Y_1),...,(X_k,Y_k)), stored sparsely: only tuples with
/// positive probability, keys ascending.
template <typename Scalar = double>
struct OutcomeDistribution {
  int m = 0;
  int k = 0;
  std::vector<std::uint64_t> keys;
  Vector<Scalar> prob;

  std::size_t support() const { return keys.size(); }

  Scalar at(std::uint64_t key) const {
    const auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return Scalar(0);
    return prob[it - keys.begin()];
  }

  Scalar total() const {
    Scalar s(0);
    for (Eigen::Index i = 0; i < prob.size(); ++i) s += prob[i];
    return s;
  }
};

/// P(x, y) = prod_j D(x_j) * pi({h : h(x_j) = y_j for all j}).
template <typename Scalar>
OutcomeDistribution<Scalar> exact_outcome_dist(const TabularPrior<Scalar>& prior, const DataDistribution& dist,
                                               int k, std::size_t budget = kOutcomeBudget) {
  const ConceptSpace& space = prior.space();
  const int m = space.m();
  if (k < 1) {
    throw ValidationError("outcome distributions need k >= 1");
  }
  if (dist.m() != m) {
    throw ValidationError("data distribution does not match the concept space");
  }
  check_outcome_budget(m, k, budget);
  std::uint64_t tuples = 1;
  for (int j = 0; j < k; ++j) tuples *= static_cast<std::uint64_t>(m);
  const std::size_t patterns = std::size_t{1} << k;

  std::vector<Scalar> weight(static_cast<std::size_t>(m));
  for (int x = 0; x < m; ++x) weight[static_cast<std::size_t>(x)] = dist.weight_as<Scalar>(x);

  OutcomeDistribution<Scalar> out;
  out.m = m;
  out.k = k;
  std::vector<std::uint64_t> keys;
  std::vector<Scalar> probs;
  std::vector<Scalar> cell(patterns);
  std::vector<int> xs(static_cast<std::size_t>(k), 0);
  for (std::uint64_t xi = 0; xi < tuples; ++xi) {
    std::uint64_t rest = xi;
    Scalar px(1);
    for (int j = 0; j < k; ++j) {
      xs[static_cast<std::size_t>(j)] = static_cast<int>(rest % static_cast<std::uint64_t>(m));
      rest /= static_cast<std::uint64_t>(m);
      px *= weight[static_cast<std::size_t>(xs[static_cast<std::size_t>(j)])];
    }
    std::fill(cell.begin(), cell.end(), Scalar(0));
    for (int h = 0; h < space.size(); ++h) {
      if (prior[h] == Scalar(0)) continue;
      std::size_t ybits = 0;
      for (int j = 0; j < k; ++j) {
        ybits |= static_cast<std::size_t>((space[h].positives >> xs[static_cast<std::size_t>(j)]) & 1U) << j;
      }
      cell[ybits] += prior[h];
    }
    for (std::size_t y = 0; y < patterns; ++y) {
      if (cell[y] == Scalar(0)) continue;
      keys.push_back(xi * patterns + y);
      probs.push_back(px * cell[y]);
    }
  }
  out.keys = std::move(keys);
  out.prob.resize(static_cast<Eigen::Index>(probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i) out.prob[static_cast<Eigen::Index>(i)] = probs[i];
  return out;
}

/// Half the L1 distance, merging the two sorted supports.
template <typename Scalar>
Scalar tv(const OutcomeDistribution<Scalar>& a, const OutcomeDistribution<Scalar>& b) {
  if (a.m != b.m || a.k != b.k) {
    throw ValidationError("outcome distributions over different spaces");
  }
  Scalar sum(0);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.keys.size() || j < b.keys.size()) {
    if (j == b.keys.size() || (i < a.keys.size() && a.keys[i] < b.keys[j])) {
      sum += abs_value<Scalar>(a.prob[static_cast<Eigen::Index>(i++)]);
    } else if (i == a.keys.size() || b.keys[j] < a.keys[i]) {
      sum += abs_value<Scalar>(b.prob[static_cast<Eigen::Index>(j++)]);
    } else {
      sum += abs_value<Scalar>(a.prob[static_cast<Eigen::Index>(i++)] - b.prob[static_cast<Eigen::Index>(j++)]);
    }
  }
  return sum / Scalar(2);
}

/// Counts of observed outcome tuples.
struct EmpiricalOutcomeDistribution {
  int m = 0;
  int k = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(const TaskSample& task);
  static EmpiricalOutcomeDistribution from_batch(const TaskBatch& batch);
};

double tv(const EmpiricalOutcomeDistribution& empirical, const OutcomeDistribution<double>& exact);

/// (1/2) sum over label patterns on the anchors of |pi_A(cell) - pi_B(cell)|,
/// cells being classes of concepts that agree on the anchor set.
template <typename Scalar>
Scalar label_conditional_tv(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b,
                            std::span<const int> anchors) {
  require_same_space(a, b);
  const ConceptSpace& space = a.space();
  for (int x : anchors) {
    if (x < 0 || x >= space.m()) {
      throw ValidationError("anchor point outside the instance space");
    }
  }
  const Mask aset = anchor_mask(anchors);
  std::unordered_map<Mask, Scalar> diff;
  for (int h = 0; h < space.size(); ++h) {
    diff[space[h].positives & aset] += a[h] - b[h];
  }
  // Sum in pattern order so the double result does not depend on hashing.
  std::map<Mask, Scalar> ordered(diff.begin(), diff.end());
  Scalar sum(0);
  for (const auto& [pattern, delta] : ordered) sum += abs_value<Scalar>(delta);
  return sum / Scalar(2);
}

/// Monte Carlo estimate of tv(P_{Z_k}(A), P_{Z_k}(B)) = E_X[label_conditional_tv]
/// for instances past the enumeration budget.
struct TvEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  ///< 95% normal interval
  std::size_t trials = 0;
};

TvEstimate estimate_outcome_tv(const TabularPrior<double>& a, const TabularPrior<double>& b,
                               const DataDistribution& dist, int k, std::size_t trials, std::uint64_t seed);

/// One line of a check report: `check,instance,k,lhs,rhs,pass`.
struct CheckRow {
  std::string check;
  std::string instance;
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

template <typename Scalar>
struct TreeReport {
  Scalar lhs{0};
  Scalar max_gap{0};  ///< max over D and y of |P_A(y | x_D) - P_B(y | x_D)|
  double factor = 0.0;  ///< (ek)^d k^2 d
  double rhs = 0.0;
  bool pass = false;
};

/// Compares the label-conditional distance on k anchors with
/// (ek)^d k^2 d times the largest gap of a d-point conditional.
template <typename Scalar>
TreeReport<Scalar> verify_tree_inequality(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b,
                                          std::span<const int> anchors, int d,
                                          std::size_t budget = kOutcomeBudget) {
  require_same_space(a, b);
  const int k = static_cast<int>(anchors.size());
  if (d < 1 || k < d) {
    throw ValidationError("tree inequality needs k = |anchors| >= d >= 1");
  }
  const double combos = std::pow(static_cast<double>(k), d) * static_cast<double>(a.size());
  if (combos > static_cast<double>(budget)) {
    throw BudgetError("tree inequality enumeration exceeds the budget");
  }
  const ConceptSpace& space = a.space();
  TreeReport<Scalar> report;
  report.lhs = label_conditional_tv(a, b, anchors);

  std::uint64_t tuples = 1;
  for (int j = 0; j < d; ++j) tuples *= static_cast<std::uint64_t>(k);
  const std::size_t patterns = std::size_t{1} << d;
  std::vector<Scalar> gap(patterns);
  std::vector<int> pts(static_cast<std::size_t>(d));
  for (std::uint64_t t = 0; t < tuples; ++t) {
    std::uint64_t rest = t;
    for (int j = 0; j < d; ++j) {
      pts[static_cast<std::size_t>(j)] = anchors[static_cast<std::size_t>(rest % static_cast<std::uint64_t>(k))];
      rest /= static_cast<std::uint64_t>(k);
    }
    std::fill(gap.begin(), gap.end(), Scalar(0));
    for (int h = 0; h < space.size(); ++h) {
      std::size_t ybits = 0;
      for (int j = 0; j < d; ++j) {
        ybits |= static_cast<std::size_t>((space[h].positives >> pts[static_cast<std::size_t>(j)]) & 1U) << j;
      }
      gap[ybits] += a[h] - b[h];
    }
    for (const Scalar& g : gap) {
      const Scalar mag = abs_value<Scalar>(g);
      if (mag > report.max_gap) report.max_gap = mag;
    }
  }
  report.factor = std::pow(std::exp(1.0) * k, d) * static_cast<double>(k) * k * d;
  report.rhs = report.factor * to_double(report.max_gap);
  if (report.max_gap == Scalar(0)) {
    report.pass = report.lhs == Scalar(0);
  } else {
    report.pass = to_double(report.lhs) <= report.rhs;
  }
  return report;
}

template <typename Scalar>
struct SqrtBoundReport {
  std::vector<Scalar> lhs;  ///< E_X |P_A(y | X_d) - P_B(y | X_d)| per label pattern y
  Scalar outcome_tv{0};     ///< tv(P_{Z_d}(A), P_{Z_d}(B))
  double rhs = 0.0;         ///< 4 sqrt(outcome_tv)
  bool pass = false;
};

/// Exact on both sides. The comparison is made squared, lhs^2 <= 16 tv, so
/// rational mode needs no square root.
template <typename Scalar>
SqrtBoundReport<Scalar> verify_sqrt_bound(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b,
                                          const DataDistribution& dist, int d,
                                          std::size_t budget = kOutcomeBudget) {
  require_same_space(a, b);
  const ConceptSpace& space = a.space();
  const int m = space.m();
  const auto pa = exact_outcome_dist(a, dist, d, budget);
  const auto pb = exact_outcome_dist(b, dist, d, budget);
  SqrtBoundReport<Scalar> report;
  report.outcome_tv = tv(pa, pb);
  const std::size_t patterns = std::size_t{1} << d;
  report.lhs.assign(patterns, Scalar(0));

  std::uint64_t tuples = 1;
  for (int j = 0; j < d; ++j) tuples *= static_cast<std::uint64_t>(m);
  std::vector<Scalar> gap(patterns);
  std::vector<int> xs(static_cast<std::size_t>(d));
  for (std::uint64_t t = 0; t < tuples; ++t) {
    std::uint64_t rest = t;
    Scalar px(1);
    for (int j = 0; j < d; ++j) {
      xs[static_cast<std::size_t>(j)] = static_cast<int>(rest % static_cast<std::uint64_t>(m));
      rest /= static_cast<std::uint64_t>(m);
      px *= dist.weight_as<Scalar>(xs[static_cast<std::size_t>(j)]);
    }
    std::fill(gap.begin(), gap.end(), Scalar(0));
    for (int h = 0; h < space.size(); ++h) {
      std::size_t ybits = 0;
      for (int j = 0; j < d; ++j) {
        ybits |= static_cast<std::size_t>((space[h].positives >> xs[static_cast<std::size_t>(j)]) & 1U) << j;
      }
      gap[ybits] += a[h] - b[h];
    }
    for (std::size_t y = 0; y < patterns; ++y) report.lhs[y] += px * abs_value<Scalar>(gap[y]);
  }
  report.rhs = 4.0 * std::sqrt(to_double(report.outcome_tv));
  report.pass = true;
  for (const Scalar& l : report.lhs) {
    if (l * l > Scalar(16) * report.outcome_tv) report.pass = false;
  }
  return report;
}

template <typename Scalar>
struct LemmaChainReport {
  std::vector<Scalar> outcome_tv;  ///< entry k-1 is tv(P_{Z_k}(A), P_{Z_k}(B))
  Scalar prior_tv{0};
  std::vector<double> gap;         ///< prior_tv - outcome_tv[k-1]
  bool monotone = true;
  bool bounded = true;

  bool pass() const { return monotone && bounded; }
};

/// Checks tv at k is nondecreasing in k and never above the prior distance.
template <typename Scalar>
LemmaChainReport<Scalar> verify_lemma_chain(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b,
                                            const DataDistribution& dist, int k_max,
                                            std::size_t budget = kOutcomeBudget) {
  if (k_max < 1) {
    throw ValidationError("lemma chain needs k_max >= 1");
  }
  LemmaChainReport<Scalar> report;
  report.prior_tv = tv(a, b);
  const Scalar slack = from_double<Scalar>(mass_tolerance<Scalar>());
  for (int k = 1; k <= k_max; ++k) {
    const Scalar value = tv(exact_outcome_dist(a, dist, k, budget), exact_outcome_dist(b, dist, k, budget));
    if (!report.outcome_tv.empty() && value + slack < report.outcome_tv.back()) report.monotone = false;
    if (value > report.prior_tv + slack) report.bounded = false;
    report.outcome_tv.push_back(value);
    report.gap.push_back(to_double(report.prior_tv) - to_double(value));
  }
  return report;
}

struct SauerReport {
  std::size_t patterns = 0;
  double bound = 0.0;  ///< (ek)^d
  bool pass = false;
};

SauerReport sauer_check(const ConceptSpace& space, std::span<const int> anchors);

}  // namespace priorest
