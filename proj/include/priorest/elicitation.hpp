#pragma once

#include "priorest/estimators.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace priorest {

/// Prices over the 2^n bundles, bundle x being the items whose bits are set.
struct Menu {
  int n = 0;
  Eigen::VectorXd prices;

  int bundles() const { return 1 << n; }
  void validate() const;
};

/// `mask<TAB>price`, one line per bundle.
void write_menu(std::ostream& out, const Menu& menu);
Menu read_menu(std::istream& in, int n);

/// Column j of `values` is s_j(x) = v_j(x) - p(x) over all bundles x.
struct SatisfactionSet {
  int n = 0;
  Eigen::MatrixXd values;           ///< bundles x functions
  Eigen::VectorXd best;             ///< max_x s_j(x)
  std::vector<std::vector<int>> canonical;  ///< [x][j] smallest j' with s_j'(x) = s_j(x)

  int functions() const { return static_cast<int>(values.cols()); }
  int bundles() const { return static_cast<int>(values.rows()); }
  static SatisfactionSet from_valuations(const Menu& menu, const Eigen::MatrixXd& valuations);
};

/// Brute-force pseudo-dimension: the largest k (up to max_k) such that some
/// k (point, threshold) pairs have all 2^k above/below patterns realized.
int pseudo_dimension(const SatisfactionSet& fs, int max_k = 3);

struct ValuationPriorFamily {
  SatisfactionSet functions;
  Menu menu;
  std::vector<Eigen::VectorXd> members;  ///< probability vectors over the functions
  int d = 1;                             ///< pseudo-dimension, sample points per customer

  int size() const { return static_cast<int>(members.size()); }
  double tv(int a, int b) const { return 0.5 * (members[static_cast<std::size_t>(a)] - members[static_cast<std::size_t>(b)]).cwiseAbs().sum(); }
};

struct ChainFamilySpec {
  int n = 8;
  int functions = 32;
  int members = 16;
  double width = 5.0;
  std::uint64_t seed = 1;
};

/// A chain of valuations v_j = clamp(base + (j/(F-1)) g, -1, 1) with base in
/// [-1, 0] and g in [0, 2] on about a quarter of the bundles, so the class is
/// pointwise monotone in j and has pseudo-dimension 1. Member priors are
/// discretized Gaussian windows centred evenly along j.
ValuationPriorFamily make_chain_family(const ChainFamilySpec& spec);

struct MethodResult {
  int chosen = -1;
  std::vector<int> queried;  ///< bundles in query order, never repeated
};

/// Value-query oracle for one customer.
using Oracle = std::function<double(int)>;

/// Greedy posterior strategy: stop once the posterior-optimal bundle has
/// expected regret <= epsilon, otherwise query the bundle with the largest
/// expected drop in posterior regret (lowest index on ties).
MethodResult method_A(const Eigen::VectorXd& prior, double epsilon, const SatisfactionSet& fs, const Oracle& oracle);

/// Queries every bundle and returns the exact maximizer.
MethodResult method_A_prime(double epsilon, int n, const Oracle& oracle);

/// method_A outcomes for every (member, customer function) at one epsilon.
class MethodCache {
public:
  MethodCache(const ValuationPriorFamily& family, double epsilon, int workers = 1);
  const MethodResult& result(int member, int function) const;
  /// Exact Q(pi, epsilon) = sum_j pi(j) |queries(member, j)|.
  double expected_queries(int member) const;
  double epsilon() const { return epsilon_; }
  const ValuationPriorFamily& family() const { return *family_; }

private:
  const ValuationPriorFamily* family_;
  double epsilon_;
  std::vector<MethodResult> results_;
  int functions_;
};

struct QEstimate {
  double mean = 0.0;
  double half_width = 0.0;  ///< 95% normal interval
  std::size_t trials = 0;
};

/// Monte Carlo mean of method_A's query count under customers drawn from the member.
QEstimate estimate_Q(const MethodCache& cache, int member, std::size_t trials, std::uint64_t seed);

/// Skeleton over the members' laws of (X, s(X)) with X uniform on bundles.
SkeletonEstimator elicitation_estimator(const ValuationPriorFamily& family);
std::uint64_t elicitation_key(const SatisfactionSet& fs, int x, int function);

struct ScheduleRDelta {
  std::vector<long> T_grid;
  std::vector<double> R;
  std::vector<double> delta;
  std::vector<double> raw_quantile;
  double alpha = 0.0;
  double safety = 1.25;
  int samples_per_T = 0;
  std::string method = "nearest-rank";

  /// Step lookup at the largest grid point <= t; infinite below the grid.
  double R_at(long t) const;
  double delta_at(long t) const;
};

/// R(T) = safety * nearest-rank (1-alpha)-quantile of tv(selected, truth)
/// over truths and replicates, then made nonincreasing from the right;
/// delta(T) is the measured exceedance rate of the final R.
ScheduleRDelta calibrate_schedule(const ValuationPriorFamily& family, double alpha, const std::vector<long>& T_grid,
                                  int replicates, std::uint64_t seed, double safety = 1.25, int workers = 1);

struct LedgerRow {
  long t = 0;
  bool a_branch = false;
  int queries = 0;
  double regret = 0.0;
  int theta_check = -1;
  double R_used = 0.0;
  bool exceeded = false;   ///< truth outside the ball (A branch only)
  int duplicates = 0;
};

struct StreamSummary {
  int stream = 0;
  int truth = 0;
  double mean_regret = 0.0;
  double tail_queries = 0.0;
  long a_branch = 0;
  long exceedances = 0;
  long duplicates = 0;
  long first_a_branch = -1;
  double q_truth = 0.0;  ///< estimate_Q(truth, epsilon/4)
  bool tail_pass = false;
};

struct ElicitationConfig {
  ChainFamilySpec family;
  double epsilon = 0.2;
  long T = 2000;
  int streams = 20;
  std::vector<long> calibration_grid{0, 25, 50, 100, 150, 200, 300, 400, 500, 700, 1000, 1500, 2000};
  int calibration_replicates = 40;
  double safety = 1.25;
  long tail = 500;
  double tail_slack = 0.5;
  std::size_t q_trials = 20000;
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const;
};

struct ElicitationResult {
  ValuationPriorFamily family;
  ScheduleRDelta schedule;
  std::vector<std::vector<LedgerRow>> ledgers;  ///< one per stream
  std::vector<StreamSummary> streams;
  double mean_regret = 0.0;
  double regret_se = 0.0;
  double regret_upper = 0.0;  ///< mean + 1.645 se
  double exceedance_rate = 0.0;
  long duplicates = 0;
  bool regret_pass = false;
  bool tail_pass = false;
  bool exceedance_pass = false;
  bool no_duplicates = false;
};

/// One customer stream of the learn-then-elicit loop for a given truth.
std::vector<LedgerRow> run_algorithm1(const ValuationPriorFamily& family, const SkeletonEstimator& est,
                                      const ScheduleRDelta& schedule, const MethodCache& cache, int truth,
                                      double epsilon, long T, std::uint64_t seed);

/// Calibrates, then runs every stream (truth = stream mod family size).
ElicitationResult run_elicitation(const ElicitationConfig& cfg);

}  // namespace priorest
