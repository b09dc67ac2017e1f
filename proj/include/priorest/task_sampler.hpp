#pragma once

#include "priorest/prior_family.hpp"
#include "priorest/rng.hpp"

#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

namespace priorest {

/// Draws from a finite categorical law by inversion of the cumulative table.
class Categorical {
public:
  explicit Categorical(const Eigen::VectorXd& weights);
  int operator()(Rng& rng) const;
  int size() const { return static_cast<int>(cumulative_.size()); }

private:
  std::vector<double> cumulative_;
};

/// Which d-subset generated the concept, and the parity bit C_t.
struct TaskTrace {
  int i_star = -1;
  int parity = 0;
};

struct TaskSample {
  std::vector<int> xs;  ///< 0-based points
  std::vector<int> ys;  ///< +1 / -1
  Concept target;
  std::optional<TaskTrace> trace;

  int k() const { return static_cast<int>(xs.size()); }
};

struct TaskBatch {
  int m = 0;
  int d = 0;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<TaskSample> tasks;

  int T() const { return static_cast<int>(tasks.size()); }
};

Concept sample_concept(const TabularPrior<double>& prior, Rng& rng);

/// The generative model of the parity family: i* uniform over d-subsets,
/// C ~ Bernoulli((1 + gamma b_{i*}) / 2), then h uniform among subsets of
/// X_{i*} whose size has parity C.
Concept sample_traced_concept(const SmoothPriorParams& params, const ConceptSpace& space, Rng& rng,
                              TaskTrace& trace);

/// Task t of a batch, generated from its own streams so it can be rebuilt in
/// isolation. `out` is overwritten and its buffers reused.
class TaskStream {
public:
  TaskStream(const TabularPrior<double>& prior, const DataDistribution& dist, int k, std::uint64_t seed);
  TaskStream(const SmoothPriorParams& params, SpacePtr space, const DataDistribution& dist, int k,
             std::uint64_t seed);

  void generate(std::uint64_t t, TaskSample& out) const;
  int m() const { return space_->m(); }
  int d() const { return space_->d(); }
  int k() const { return k_; }
  std::uint64_t seed() const { return seed_; }

private:
  SpacePtr space_;
  std::optional<Categorical> concepts_;
  std::optional<SmoothPriorParams> params_;
  Categorical points_;
  int k_;
  std::uint64_t seed_;
};

/// k defaults to d at the call sites; T >= 1 and k >= 1 are required.
TaskBatch sample_batch(const TabularPrior<double>& prior, const DataDistribution& dist, int T, int k,
                       std::uint64_t seed);
TaskBatch sample_batch(const SmoothPriorParams& params, SpacePtr space, const DataDistribution& dist, int T,
                       int k, std::uint64_t seed);

TaskSample sample_task_traced(const SmoothPriorParams& params, SpacePtr space, const DataDistribution& dist,
                              int k, Rng& rng);

/// True when the d draws are exactly the d distinct points of X_{i*}.
bool covers_subset(const TaskSample& task, Mask subset);

/// Header `# m=.. d=.. k=.. T=.. seed=..`, then `t<TAB>i<TAB>x<TAB>y` per
/// observation with 1-based t, i and x.
void write_batch(std::ostream& out, const TaskBatch& batch);

}  // namespace priorest
