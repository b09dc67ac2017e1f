#pragma once

#include "priorest/outcome_dist.hpp"

#include <unordered_map>
#include <utility>
#include <vector>

namespace priorest {

/// Probability table over opaque 64-bit keys, keys ascending.
struct KeyedLaw {
  std::vector<std::uint64_t> keys;
  Eigen::VectorXd prob;

  static KeyedLaw from(const OutcomeDistribution<double>& dist);
  /// Concept masks as keys; the law of h* itself.
  static KeyedLaw from_prior(const TabularPrior<double>& prior);
};

double tv(const KeyedLaw& a, const KeyedLaw& b);

struct SkeletonResult {
  int selected = -1;
  double score = 0.0;      ///< selected member's max Yatracos deviation
  Eigen::VectorXd scores;  ///< per member
  Eigen::VectorXd mu;      ///< empirical mass of every Yatracos set
};

/// Minimum-distance selection over a finite list of laws. For every ordered
/// pair (i, j), i != j, the Yatracos set A_ij = {z : P_i(z) > P_j(z)} is
/// stored as a 0/1 row over the union support, and P_l(A_ij) is tabulated.
class SkeletonEstimator {
public:
  explicit SkeletonEstimator(std::vector<KeyedLaw> members);

  /// Outcome laws of every cover member at k samples per task.
  static SkeletonEstimator for_outcomes(const CoverFamily& cover, const DataDistribution& dist, int k,
                                        std::size_t budget = kOutcomeBudget);
  /// Laws of the concept itself, for the direct-access baseline.
  static SkeletonEstimator for_concepts(const CoverFamily& cover);

  int size() const { return static_cast<int>(members_.size()); }
  int pairs() const { return static_cast<int>(pair_index_.size()); }
  std::size_t support() const { return support_.size(); }
  const std::vector<std::uint64_t>& support_keys() const { return support_; }
  std::pair<int, int> pair(int p) const { return pair_index_[static_cast<std::size_t>(p)]; }
  const KeyedLaw& member(int l) const { return members_[static_cast<std::size_t>(l)]; }

  /// Position of a key in the union support, or -1.
  int index_of(std::uint64_t key) const;

  /// Stored membership of a key in A_p.
  bool in_yatracos(int p, std::uint64_t key) const;
  /// Membership recomputed from the member tables.
  bool recompute_membership(int p, std::uint64_t key) const;

  /// members x pairs: P_l(A_p).
  const Eigen::MatrixXd& member_mass() const { return member_mass_; }
  /// members x members: tv between member laws.
  const Eigen::MatrixXd& member_tv() const { return member_tv_; }

  /// Running counts of observed outcomes; adding one observation costs one
  /// column update of the pair hit counts.
  class Accumulator {
  public:
    explicit Accumulator(const SkeletonEstimator& est);
    void add(std::uint64_t key);
    std::uint64_t total() const { return total_; }
    Eigen::VectorXd mu() const;

  private:
    const SkeletonEstimator* est_;
    Eigen::VectorXd hits_;
    std::uint64_t total_ = 0;
  };

  Accumulator accumulator() const { return Accumulator(*this); }

  /// argmin_l max_p |P_l(A_p) - mu(A_p)|, ties to the lowest index.
  SkeletonResult select(const Accumulator& acc) const;
  SkeletonResult select_mu(const Eigen::VectorXd& mu) const;

private:
  std::vector<KeyedLaw> members_;
  std::vector<std::uint64_t> support_;
  std::unordered_map<std::uint64_t, int> position_;
  std::vector<std::pair<int, int>> pair_index_;
  Eigen::MatrixXd yatracos_;  ///< pairs x support, 0/1
  Eigen::MatrixXd member_mass_;
  Eigen::MatrixXd member_tv_;
};

/// Runs the skeleton over a batch; every task must carry k samples matching
/// the estimator's outcome laws.
SkeletonResult skeleton_estimate(const TaskBatch& batch, const SkeletonEstimator& est);

/// tv(sel, truth) <= 3 min_l tv(l, truth) + 2 max_A |mu(A) - P_truth(A)|.
struct Decomposition {
  double lhs = 0.0;
  double min_tv = 0.0;
  double max_dev = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

Decomposition check_decomposition(const SkeletonEstimator& est, const SkeletonResult& result, int truth);
Decomposition check_decomposition(const SkeletonEstimator& est, const SkeletonResult& result,
                                  const KeyedLaw& truth);

/// Largest |mu(A) - P_truth(A)| over the Yatracos sets, truth a member.
double max_yatracos_deviation(const SkeletonEstimator& est, const Eigen::VectorXd& mu, int truth);

/// Minimum-distance selection against the empirical law of observed concepts.
int direct_estimate(std::span<const Concept> concepts, const CoverFamily& cover);
int direct_estimate(std::span<const Concept> concepts, const SkeletonEstimator& concept_est);

struct ReductionEstimate {
  std::vector<int> b_hat;
  std::vector<double> p_hat;
  double threshold = 0.0;
};

/// b_hat_i from the estimated mass of the concept h_i = X_i: the sign that
/// the parity of d favours if the mass is strictly above (1/2)^d / C(m,d).
template <typename Scalar>
ReductionEstimate reduce_to_signs(const TabularPrior<Scalar>& estimate, const SmoothPriorParams& params) {
  require_matching(params, estimate.space());
  const ConceptSpace& space = estimate.space();
  const std::uint64_t cmd = binomial(space.m(), space.d());
  Scalar threshold;
  if constexpr (is_exact_v<Scalar>) {
    threshold = Rational(BigInt(1), BigInt(cmd) << space.d());
  } else {
    threshold = std::ldexp(1.0, -space.d()) / static_cast<double>(cmd);
  }
  const int parity = space.d() % 2;
  ReductionEstimate out;
  out.threshold = to_double(threshold);
  for (Mask xi : space.d_subsets()) {
    const Scalar mass = estimate.mass_of(Concept{xi});
    const int b = mass > threshold ? 2 * parity - 1 : 1 - 2 * parity;
    out.b_hat.push_back(b);
    out.p_hat.push_back((1.0 + params.gamma_m * b) / 2.0);
  }
  return out;
}

/// (1/2) sum_i (2^d C(m,d))^{-1} |p_hat_i - p_i|.
double reduction_error(const ReductionEstimate& est, const SmoothPriorParams& params);

/// (1+gamma)/2 iff the mean of the bits is at least 1/2; empty input goes high.
double majority_rule(std::span<const int> bits, double gamma);

}  // namespace priorest
