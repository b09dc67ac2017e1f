#include "priorest/estimators.hpp"

#include <algorithm>
#include <set>

namespace priorest {

KeyedLaw KeyedLaw::from(const OutcomeDistribution<double>& dist) { return KeyedLaw{dist.keys, dist.prob}; }

KeyedLaw KeyedLaw::from_prior(const TabularPrior<double>& prior) {
  std::vector<std::pair<std::uint64_t, double>> entries;
  for (int i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0) entries.emplace_back(prior.space()[i].positives, prior[i]);
  }
  std::sort(entries.begin(), entries.end());
  KeyedLaw law;
  law.prob.resize(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    law.keys.push_back(entries[i].first);
    law.prob[static_cast<Eigen::Index>(i)] = entries[i].second;
  }
  return law;
}

double tv(const KeyedLaw& a, const KeyedLaw& b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.keys.size() || j < b.keys.size()) {
    if (j == b.keys.size() || (i < a.keys.size() && a.keys[i] < b.keys[j])) {
      sum += std::abs(a.prob[static_cast<Eigen::Index>(i++)]);
    } else if (i == a.keys.size() || b.keys[j] < a.keys[i]) {
      sum += std::abs(b.prob[static_cast<Eigen::Index>(j++)]);
    } else {
      sum += std::abs(a.prob[static_cast<Eigen::Index>(i++)] - b.prob[static_cast<Eigen::Index>(j++)]);
    }
  }
  return sum / 2.0;
}

SkeletonEstimator::SkeletonEstimator(std::vector<KeyedLaw> members) : members_(std::move(members)) {
  if (members_.empty()) {
    throw ValidationError("skeleton estimator needs a nonempty cover");
  }
  std::set<std::uint64_t> keys;
  for (const auto& law : members_) {
    if (static_cast<std::size_t>(law.prob.size()) != law.keys.size()) {
      throw ValidationError("keyed law with mismatched key and probability counts");
    }
    keys.insert(law.keys.begin(), law.keys.end());
  }
  support_.assign(keys.begin(), keys.end());
  for (std::size_t s = 0; s < support_.size(); ++s) position_.emplace(support_[s], static_cast<int>(s));

  const int n = size();
  const Eigen::Index width = static_cast<Eigen::Index>(support_.size());
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, width);
  for (int l = 0; l < n; ++l) {
    const auto& law = members_[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < law.keys.size(); ++i) {
      dense(l, position_.at(law.keys[i])) = law.prob[static_cast<Eigen::Index>(i)];
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) pair_index_.emplace_back(i, j);
    }
  }
  yatracos_.resize(pairs(), width);
  for (int p = 0; p < pairs(); ++p) {
    const auto [i, j] = pair_index_[static_cast<std::size_t>(p)];
    yatracos_.row(p) = (dense.row(i).array() > dense.row(j).array()).cast<double>().matrix();
  }
  member_mass_ = dense * yatracos_.transpose();
  member_tv_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) member_tv_(i, j) = 0.5 * (dense.row(i) - dense.row(j)).cwiseAbs().sum();
  }
}

SkeletonEstimator SkeletonEstimator::for_outcomes(const CoverFamily& cover, const DataDistribution& dist, int k,
                                                  std::size_t budget) {
  std::vector<KeyedLaw> laws;
  laws.reserve(cover.members.size());
  for (const auto& member : cover.members) laws.push_back(KeyedLaw::from(exact_outcome_dist(member, dist, k, budget)));
  return SkeletonEstimator(std::move(laws));
}

SkeletonEstimator SkeletonEstimator::for_concepts(const CoverFamily& cover) {
  std::vector<KeyedLaw> laws;
  laws.reserve(cover.members.size());
  for (const auto& member : cover.members) laws.push_back(KeyedLaw::from_prior(member));
  return SkeletonEstimator(std::move(laws));
}

int SkeletonEstimator::index_of(std::uint64_t key) const {
  const auto it = position_.find(key);
  return it == position_.end() ? -1 : it->second;
}

bool SkeletonEstimator::in_yatracos(int p, std::uint64_t key) const {
  const int s = index_of(key);
  return s >= 0 && yatracos_(p, s) > 0.5;
}

namespace {

double law_at(const KeyedLaw& law, std::uint64_t key) {
  const auto it = std::lower_bound(law.keys.begin(), law.keys.end(), key);
  if (it == law.keys.end() || *it != key) return 0.0;
  return law.prob[it - law.keys.begin()];
}

}  // namespace

bool SkeletonEstimator::recompute_membership(int p, std::uint64_t key) const {
  const auto [i, j] = pair(p);
  return law_at(member(i), key) > law_at(member(j), key);
}

SkeletonEstimator::Accumulator::Accumulator(const SkeletonEstimator& est)
    : est_(&est), hits_(Eigen::VectorXd::Zero(est.pairs())) {}

void SkeletonEstimator::Accumulator::add(std::uint64_t key) {
  ++total_;
  const int s = est_->index_of(key);
  // Outcomes no member can produce lie in no Yatracos set.
  if (s >= 0) hits_ += est_->yatracos_.col(s);
}

Eigen::VectorXd SkeletonEstimator::Accumulator::mu() const {
  if (total_ == 0) {
    throw ValidationError("skeleton estimate needs at least one task");
  }
  return hits_ / static_cast<double>(total_);
}

SkeletonResult SkeletonEstimator::select(const Accumulator& acc) const { return select_mu(acc.mu()); }

SkeletonResult SkeletonEstimator::select_mu(const Eigen::VectorXd& mu) const {
  SkeletonResult result;
  result.mu = mu;
  if (pairs() == 0) {
    result.selected = 0;
    result.scores = Eigen::VectorXd::Zero(1);
    return result;
  }
  result.scores = (member_mass_.rowwise() - mu.transpose()).cwiseAbs().rowwise().maxCoeff();
  result.selected = 0;
  for (int l = 1; l < size(); ++l) {
    if (result.scores[l] < result.scores[result.selected]) result.selected = l;
  }
  result.score = result.scores[result.selected];
  return result;
}

SkeletonResult skeleton_estimate(const TaskBatch& batch, const SkeletonEstimator& est) {
  if (batch.tasks.empty()) {
    throw ValidationError("skeleton estimate needs a nonempty batch");
  }
  auto acc = est.accumulator();
  for (const auto& task : batch.tasks) {
    if (task.k() != batch.k) {
      throw ValidationError("every task in the batch must carry k samples");
    }
    acc.add(outcome_key(task.xs, task.ys, batch.m));
  }
  return est.select(acc);
}

double max_yatracos_deviation(const SkeletonEstimator& est, const Eigen::VectorXd& mu, int truth) {
  if (est.pairs() == 0) return 0.0;
  return (est.member_mass().row(truth).transpose() - mu).cwiseAbs().maxCoeff();
}

Decomposition check_decomposition(const SkeletonEstimator& est, const SkeletonResult& result, int truth) {
  Decomposition out;
  out.lhs = est.member_tv()(result.selected, truth);
  out.min_tv = est.member_tv().row(truth).minCoeff();
  out.max_dev = max_yatracos_deviation(est, result.mu, truth);
  out.rhs = 3.0 * out.min_tv + 2.0 * out.max_dev;
  out.pass = out.lhs <= out.rhs + 1e-12;
  return out;
}

Decomposition check_decomposition(const SkeletonEstimator& est, const SkeletonResult& result,
                                  const KeyedLaw& truth) {
  Decomposition out;
  out.lhs = tv(est.member(result.selected), truth);
  out.min_tv = tv(est.member(0), truth);
  for (int l = 1; l < est.size(); ++l) out.min_tv = std::min(out.min_tv, tv(est.member(l), truth));
  for (int p = 0; p < est.pairs(); ++p) {
    double mass = 0.0;
    for (std::size_t i = 0; i < truth.keys.size(); ++i) {
      if (est.in_yatracos(p, truth.keys[i])) mass += truth.prob[static_cast<Eigen::Index>(i)];
    }
    out.max_dev = std::max(out.max_dev, std::abs(result.mu[p] - mass));
  }
  out.rhs = 3.0 * out.min_tv + 2.0 * out.max_dev;
  out.pass = out.lhs <= out.rhs + 1e-12;
  return out;
}

int direct_estimate(std::span<const Concept> concepts, const SkeletonEstimator& concept_est) {
  if (concepts.empty()) {
    throw ValidationError("direct estimate needs at least one observed concept");
  }
  auto acc = concept_est.accumulator();
  for (const Concept& h : concepts) acc.add(h.positives);
  return concept_est.select(acc).selected;
}

int direct_estimate(std::span<const Concept> concepts, const CoverFamily& cover) {
  return direct_estimate(concepts, SkeletonEstimator::for_concepts(cover));
}

double reduction_error(const ReductionEstimate& est, const SmoothPriorParams& params) {
  if (est.p_hat.size() != params.b.size()) {
    throw ValidationError("reduction estimate and parameters disagree in length");
  }
  const double scale = std::ldexp(1.0, -params.d) / static_cast<double>(params.b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < params.b.size(); ++i) {
    const double p = (1.0 + params.gamma_m * params.b[i]) / 2.0;
    sum += std::abs(est.p_hat[i] - p);
  }
  return 0.5 * scale * sum;
}

double majority_rule(std::span<const int> bits, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError("majority rule needs gamma in (0, 1)");
  }
  std::size_t ones = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) {
      throw ValidationError("majority rule takes 0/1 outcomes");
    }
    ones += static_cast<std::size_t>(b);
  }
  return 2 * ones >= bits.size() ? (1.0 + gamma) / 2.0 : (1.0 - gamma) / 2.0;
}

}  // namespace priorest
