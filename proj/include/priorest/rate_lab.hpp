#pragma once

#include "priorest/estimators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace priorest {

struct ExperimentConfig {
  int m = 3;
  int d = 2;
  double L = 1.0;
  double alpha = 1.0;
  int k = 0;                         ///< samples per task; 0 means d
  std::string family = "theorem2";   ///< theorem2 | pair | singleton | grid
  double epsilon = 0.25;             ///< grid family resolution
  std::vector<long> T_grid{100, 1000, 10000};
  int replicates = 100;
  std::uint64_t seed = 1;
  int sampled_truths = 8;            ///< used when the family has more than 10 members
  std::size_t max_members = 4096;
  std::size_t outcome_budget = kOutcomeBudget;
  bool baseline = false;             ///< also run the direct-access estimator on the same batches
  bool m_from_T = false;             ///< lower experiment: choose m per T
  int workers = 1;

  int samples_per_task() const { return k == 0 ? d : k; }
  /// T grid strictly increasing, replicates >= 1, k >= 1.
  void validate() const;
};

struct RatePoint {
  long T = 0;
  double mean = 0.0;  ///< worst truth's mean error
  double se = 0.0;
  int worst_truth = -1;
  double average = 0.0;  ///< mean over all truths and replicates
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int used = 0;
};

struct RateCurve {
  std::vector<RatePoint> points;
  std::optional<RateFit> fit;
  double upper_exponent = 0.0;
  double lower_exponent = 0.0;
};

/// alpha^2 / (2 (d + 2 alpha) (alpha + 2 (d + 1))).
double upper_rate_exponent(int d, double alpha);
/// alpha / (2 (d + alpha)).
double lower_rate_exponent(int d, double alpha);

/// Least squares of log mean risk on log T over points with positive risk;
/// fewer than three such points is an error.
RateFit fit_rate_exponent(const std::vector<RatePoint>& points);

/// mean[j+1] <= mean[j] + z sqrt(se[j]^2 + se[j+1]^2) for every step.
bool nonincreasing_within(const std::vector<RatePoint>& points, double z);

struct RunRow {
  std::string experiment;
  long T = 0;
  int replicate = 0;
  int truth_id = 0;
  int selected_id = 0;
  double tv_error = 0.0;
  double max_yatracos_dev = 0.0;
  bool decomposition_pass = true;
};

struct UpperResult {
  CoverFamily family;
  std::vector<int> truths;
  RateCurve curve;
  std::optional<RateCurve> baseline;
  std::vector<RunRow> rows;  ///< skeleton rows, then direct rows when present
  std::size_t decomposition_failures = 0;
  /// Per T: mean of (direct - skeleton) error over all paired units and its SE.
  std::vector<double> paired_gap;
  std::vector<double> paired_se;
};

CoverFamily build_family(const ExperimentConfig& cfg, SpacePtr space);

/// Truth members: all of them for families of at most 10, otherwise a fixed
/// random sample plus the first and last member.
std::vector<int> choose_truths(int family_size, int sampled, std::uint64_t seed);

UpperResult run_upper_experiment(const ExperimentConfig& cfg);

/// (gamma / (32 2^d)) exp(-43 (2/L)^{2d/alpha} d^{2d} gamma^{2+2d/alpha} T).
double lower_bound_floor(double gamma, int d, double L, double alpha, double T);
double log_lower_bound_floor(double gamma, int d, double L, double alpha, double T);

/// ceil((L/2)^{1/alpha} (43 (2/L)^{2d/alpha} d^{2d} T)^{1/(2(d+alpha))}).
int m_from_T(double T, int d, double L, double alpha);

struct LowerPoint {
  long T = 0;
  int m = 0;
  double gamma = 0.0;
  int replicates = 0;
  double mean_error = 0.0;
  double se = 0.0;
  double log_floor = 0.0;
  bool pass = false;          ///< mean - 1.645 se above the floor
  double mean_events = 0.0;   ///< average N_i over coordinates and replicates
  double expected_events = 0.0;
  double events_sigma = 0.0;
  bool events_pass = false;   ///< within 3 sigma
};

struct LowerResult {
  std::vector<LowerPoint> points;
  std::vector<double> errors;  ///< per (T, replicate), T-major
};

/// Skeleton over the full parity family, then the sign reduction.
LowerResult run_lower_experiment(const ExperimentConfig& cfg);

}  // namespace priorest
