#include "priorest/task_sampler.hpp"

#include <algorithm>
#include <ostream>

namespace priorest {

Categorical::Categorical(const Eigen::VectorXd& weights) {
  if (weights.size() == 0) {
    throw ValidationError("categorical law needs at least one outcome");
  }
  cumulative_.resize(static_cast<std::size_t>(weights.size()));
  double run = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) {
      throw ValidationError("categorical weights must be nonnegative");
    }
    run += weights[i];
    cumulative_[static_cast<std::size_t>(i)] = run;
  }
  if (!(run > 0.0)) {
    throw ValidationError("categorical weights sum to zero");
  }
  for (double& c : cumulative_) c /= run;
}

int Categorical::operator()(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  // Zero-weight outcomes repeat their predecessor's cumulative value, so
  // upper_bound never lands on them.
  if (it == cumulative_.end()) --it;
  return static_cast<int>(it - cumulative_.begin());
}

Concept sample_concept(const TabularPrior<double>& prior, Rng& rng) {
  const Categorical law(prior.mass());
  return prior.space()[law(rng)];
}

Concept sample_traced_concept(const SmoothPriorParams& params, const ConceptSpace& space, Rng& rng,
                              TaskTrace& trace) {
  require_matching(params, space);
  const auto& subsets = space.d_subsets();
  const int i = static_cast<int>(rng.below(subsets.size()));
  const int c = rng.bernoulli((1.0 + params.gamma_m * params.b[static_cast<std::size_t>(i)]) / 2.0) ? 1 : 0;
  trace = TaskTrace{i, c};
  // Subsets of X_i with |H| of parity c: choose the first d-1 membership bits
  // freely, then the last bit fixes the parity.
  const Mask xi = subsets[static_cast<std::size_t>(i)];
  const int d = space.d();
  const std::uint64_t free_bits = rng.below(std::uint64_t{1} << (d - 1));
  Mask h = 0;
  Mask rest = xi;
  int count = 0;
  for (int j = 0; j < d - 1; ++j) {
    const Mask bit = rest & (~rest + 1);
    rest &= rest - 1;
    if ((free_bits >> j) & 1U) {
      h |= bit;
      ++count;
    }
  }
  if ((count & 1) != c) h |= rest;
  return Concept{h};
}

TaskStream::TaskStream(const TabularPrior<double>& prior, const DataDistribution& dist, int k,
                       std::uint64_t seed)
    : space_(prior.space_ptr()), concepts_(Categorical(prior.mass())), points_(dist.weights()), k_(k), seed_(seed) {
  if (k < 1) {
    throw ValidationError("tasks need k >= 1 samples");
  }
  if (dist.m() != space_->m()) {
    throw ValidationError("data distribution does not match the concept space");
  }
}

TaskStream::TaskStream(const SmoothPriorParams& params, SpacePtr space, const DataDistribution& dist, int k,
                       std::uint64_t seed)
    : space_(std::move(space)), params_(params), points_(dist.weights()), k_(k), seed_(seed) {
  require_matching(params, *space_);
  if (k < 1) {
    throw ValidationError("tasks need k >= 1 samples");
  }
  if (dist.m() != space_->m()) {
    throw ValidationError("data distribution does not match the concept space");
  }
}

void TaskStream::generate(std::uint64_t t, TaskSample& out) const {
  Rng concept_rng(seed_, t, Purpose::concept_draw);
  Rng point_rng(seed_, t, Purpose::point_draw);
  if (params_) {
    TaskTrace trace;
    out.target = sample_traced_concept(*params_, *space_, concept_rng, trace);
    out.trace = trace;
  } else {
    out.target = (*space_)[(*concepts_)(concept_rng)];
    out.trace.reset();
  }
  out.xs.resize(static_cast<std::size_t>(k_));
  out.ys.resize(static_cast<std::size_t>(k_));
  for (int j = 0; j < k_; ++j) {
    const int x = points_(point_rng);
    out.xs[static_cast<std::size_t>(j)] = x;
    out.ys[static_cast<std::size_t>(j)] = out.target.label(x);
  }
}

namespace {

TaskBatch fill_batch(const TaskStream& stream, int T, std::uint64_t seed) {
  if (T < 1) {
    throw ValidationError("a batch needs T >= 1 tasks");
  }
  TaskBatch batch;
  batch.m = stream.m();
  batch.d = stream.d();
  batch.k = stream.k();
  batch.seed = seed;
  batch.tasks.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) stream.generate(static_cast<std::uint64_t>(t), batch.tasks[static_cast<std::size_t>(t)]);
  return batch;
}

}  // namespace

TaskBatch sample_batch(const TabularPrior<double>& prior, const DataDistribution& dist, int T, int k,
                       std::uint64_t seed) {
  if (T < 1) {
    throw ValidationError("a batch needs T >= 1 tasks");
  }
  return fill_batch(TaskStream(prior, dist, k, seed), T, seed);
}

TaskBatch sample_batch(const SmoothPriorParams& params, SpacePtr space, const DataDistribution& dist, int T,
                       int k, std::uint64_t seed) {
  if (T < 1) {
    throw ValidationError("a batch needs T >= 1 tasks");
  }
  return fill_batch(TaskStream(params, std::move(space), dist, k, seed), T, seed);
}

TaskSample sample_task_traced(const SmoothPriorParams& params, SpacePtr space, const DataDistribution& dist,
                              int k, Rng& rng) {
  if (k < 1) {
    throw ValidationError("tasks need k >= 1 samples");
  }
  if (dist.m() != space->m()) {
    throw ValidationError("data distribution does not match the concept space");
  }
  TaskSample out;
  TaskTrace trace;
  out.target = sample_traced_concept(params, *space, rng, trace);
  out.trace = trace;
  const Categorical points(dist.weights());
  for (int j = 0; j < k; ++j) {
    const int x = points(rng);
    out.xs.push_back(x);
    out.ys.push_back(out.target.label(x));
  }
  return out;
}

bool covers_subset(const TaskSample& task, Mask subset) {
  const int d = std::popcount(subset);
  if (task.k() < d) return false;
  Mask seen = 0;
  for (int j = 0; j < d; ++j) seen |= Mask{1} << task.xs[static_cast<std::size_t>(j)];
  return seen == subset;
}

void write_batch(std::ostream& out, const TaskBatch& batch) {
  out << "# m=" << batch.m << " d=" << batch.d << " k=" << batch.k << " T=" << batch.T()
      << " seed=" << batch.seed << '\n';
  for (int t = 0; t < batch.T(); ++t) {
    const auto& task = batch.tasks[static_cast<std::size_t>(t)];
    for (int i = 0; i < task.k(); ++i) {
      out << t + 1 << '\t' << i + 1 << '\t' << task.xs[static_cast<std::size_t>(i)] + 1 << '\t'
          << task.ys[static_cast<std::size_t>(i)] << '\n';
    }
  }
}

}  // namespace priorest
