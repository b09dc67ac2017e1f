#include "priorest/outcome_dist.hpp"

namespace priorest {

std::uint64_t outcome_key(std::span<const int> xs, std::span<const int> ys, int m) {
  if (xs.size() != ys.size()) {
    throw ValidationError("outcome tuple with mismatched x and y lengths");
  }
  const int k = static_cast<int>(xs.size());
  std::uint64_t xi = 0;
  std::uint64_t scale = 1;
  std::uint64_t ybits = 0;
  for (int j = 0; j < k; ++j) {
    xi += static_cast<std::uint64_t>(xs[static_cast<std::size_t>(j)]) * scale;
    scale *= static_cast<std::uint64_t>(m);
    if (ys[static_cast<std::size_t>(j)] > 0) ybits |= std::uint64_t{1} << j;
  }
  return (xi << k) | ybits;
}

void decode_outcome_key(std::uint64_t key, int m, int k, std::vector<int>& xs, std::vector<int>& ys) {
  xs.resize(static_cast<std::size_t>(k));
  ys.resize(static_cast<std::size_t>(k));
  const std::uint64_t ybits = key & ((std::uint64_t{1} << k) - 1);
  std::uint64_t xi = key >> k;
  for (int j = 0; j < k; ++j) {
    xs[static_cast<std::size_t>(j)] = static_cast<int>(xi % static_cast<std::uint64_t>(m));
    xi /= static_cast<std::uint64_t>(m);
    ys[static_cast<std::size_t>(j)] = (ybits >> j) & 1U ? +1 : -1;
  }
}

void check_outcome_budget(int m, int k, std::size_t budget) {
  const double cells = std::pow(2.0 * m, k);
  if (cells > static_cast<double>(budget)) {
    throw BudgetError("outcome table (2m)^k = " + format_double(cells) + " exceeds the budget of " +
                      std::to_string(budget));
  }
}

void EmpiricalOutcomeDistribution::add(const TaskSample& task) {
  if (m < 1) {
    throw ValidationError("empirical outcome law needs m set before adding tasks");
  }
  if (total == 0 && k == 0) {
    k = task.k();
  }
  if (task.k() != k) {
    throw ValidationError("empirical outcome law mixes tasks of different k");
  }
  ++counts[outcome_key(task.xs, task.ys, m)];
  ++total;
}

EmpiricalOutcomeDistribution EmpiricalOutcomeDistribution::from_batch(const TaskBatch& batch) {
  EmpiricalOutcomeDistribution out;
  out.m = batch.m;
  out.k = batch.k;
  for (const auto& task : batch.tasks) out.add(task);
  return out;
}

double tv(const EmpiricalOutcomeDistribution& empirical, const OutcomeDistribution<double>& exact) {
  if (empirical.m != exact.m || empirical.k != exact.k) {
    throw ValidationError("empirical and exact outcome laws over different spaces");
  }
  if (empirical.total == 0) {
    throw ValidationError("empirical outcome law is empty");
  }
  const double n = static_cast<double>(empirical.total);
  double sum = 0.0;
  auto it = empirical.counts.begin();
  std::size_t j = 0;
  while (it != empirical.counts.end() || j < exact.keys.size()) {
    if (j == exact.keys.size() || (it != empirical.counts.end() && it->first < exact.keys[j])) {
      sum += static_cast<double>(it->second) / n;
      ++it;
    } else if (it == empirical.counts.end() || exact.keys[j] < it->first) {
      sum += exact.prob[static_cast<Eigen::Index>(j)];
      ++j;
    } else {
      sum += std::abs(static_cast<double>(it->second) / n - exact.prob[static_cast<Eigen::Index>(j)]);
      ++it;
      ++j;
    }
  }
  return sum / 2.0;
}

TvEstimate estimate_outcome_tv(const TabularPrior<double>& a, const TabularPrior<double>& b,
                               const DataDistribution& dist, int k, std::size_t trials, std::uint64_t seed) {
  if (trials < 2) {
    throw ValidationError("Monte Carlo tv needs at least two trials");
  }
  const Categorical points(dist.weights());
  Rng rng(seed, static_cast<std::uint64_t>(k), Purpose::point_draw);
  std::vector<int> xs(static_cast<std::size_t>(k));
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (int& x : xs) x = points(rng);
    const double v = label_conditional_tv(a, b, std::span<const int>(xs));
    const double delta = v - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(trials - 1);
  return TvEstimate{mean, 1.96 * std::sqrt(var / static_cast<double>(trials)), trials};
}

SauerReport sauer_check(const ConceptSpace& space, std::span<const int> anchors) {
  SauerReport report;
  report.patterns = realizable_patterns(space, anchors);
  const double k = static_cast<double>(anchors.size());
  report.bound = std::pow(std::exp(1.0) * k, space.d());
  report.pass = static_cast<double>(report.patterns) <= report.bound;
  return report;
}

}  // namespace priorest
