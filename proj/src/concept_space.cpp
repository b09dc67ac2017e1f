#include "priorest/concept_space.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace priorest {

std::vector<Mask> masks_of_size(int m, int q) {
  std::vector<Mask> out;
  if (q < 0 || q > m) {
    return out;
  }
  if (q == 0) {
    out.push_back(0);
    return out;
  }
  const Mask limit = m == 64 ? ~Mask{0} : (Mask{1} << m) - 1;
  Mask v = q == 64 ? ~Mask{0} : (Mask{1} << q) - 1;
  while (true) {
    out.push_back(v);
    // Gosper's hack: next integer with the same popcount.
    const Mask c = v & (~v + 1);
    const Mask r = v + c;
    if (r == 0 || r < v) {
      break;
    }
    v = (((r ^ v) >> 2) / c) | r;
    if (v > limit) {
      break;
    }
  }
  return out;
}

ConceptSpace::ConceptSpace(int m, int d) : m_(m), d_(d) {
  if (m < 1 || m > kMaxPoints) {
    throw ValidationError("instance space size m=" + std::to_string(m) + " outside [1, 64]");
  }
  if (d < 1 || d > m) {
    throw ValidationError("need 1 <= d <= m, got m=" + std::to_string(m) + " d=" +
                          std::to_string(d));
  }
  std::uint64_t total = 0;
  for (int q = 0; q <= d; ++q) {
    total += binomial(m, q);
  }
  if (total > (std::uint64_t{1} << 22)) {
    throw BudgetError("concept space C_{" + std::to_string(m) + "," + std::to_string(d) +
                      "} has " + std::to_string(total) + " concepts");
  }
  concepts_.reserve(total);
  for (int q = 0; q <= d; ++q) {
    for (Mask mask : masks_of_size(m, q)) {
      index_.emplace(mask, static_cast<int>(concepts_.size()));
      concepts_.push_back(Concept{mask});
    }
  }
  d_subsets_ = masks_of_size(m, d);
}

int ConceptSpace::index_of(Concept h) const {
  const auto it = index_.find(h.positives);
  return it == index_.end() ? -1 : it->second;
}

SpacePtr enumerate_concepts(int m, int d) { return std::make_shared<const ConceptSpace>(m, d); }

DataDistribution::DataDistribution(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1 || weights_.size() > kMaxPoints) {
    throw ValidationError("data distribution needs between 1 and 64 points");
  }
  if ((weights_.array() <= 0.0).any()) {
    throw ValidationError("data distribution weights must be strictly positive");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw ValidationError("data distribution weights must sum to 1");
  }
  uniform_ = (weights_.array() == weights_[0]).all();
}

DataDistribution DataDistribution::uniform(int m) {
  if (m < 1) {
    throw ValidationError("uniform distribution needs m >= 1");
  }
  DataDistribution out(Eigen::VectorXd::Constant(m, 1.0 / m));
  out.uniform_ = true;
  return out;
}

double DataDistribution::mass(Mask points) const {
  double total = 0.0;
  while (points) {
    const int x = std::countr_zero(points);
    if (x >= m()) {
      throw ValidationError("point outside instance space");
    }
    total += weights_[x];
    points &= points - 1;
  }
  return total;
}

double rho(Concept h, Concept g, const DataDistribution& dist) {
  const Mask diff = h.positives ^ g.positives;
  if (dist.m() < kMaxPoints && (diff >> dist.m()) != 0) {
    throw ValidationError("concept outside the data distribution's instance space");
  }
  return dist.mass(diff);
}

namespace {

bool shattered(std::span<const Concept> concepts, Mask subset) {
  const int s = std::popcount(subset);
  std::unordered_set<Mask> seen;
  for (const Concept& c : concepts) {
    seen.insert(c.positives & subset);
    if (static_cast<int>(seen.size()) == (1 << s)) {
      return true;
    }
  }
  return false;
}

}  // namespace

int vc_dimension(std::span<const Concept> concepts, int m) {
  if (m > kShatterGuard) {
    throw BudgetError("shattering check limited to m <= " + std::to_string(kShatterGuard));
  }
  int best = 0;
  for (int s = 1; s <= m; ++s) {
    bool any = false;
    for (Mask subset : masks_of_size(m, s)) {
      if (shattered(concepts, subset)) {
        any = true;
        break;
      }
    }
    if (!any) {
      break;
    }
    best = s;
  }
  return best;
}

bool verify_vc_dimension(const ConceptSpace& space) {
  if (space.m() > kShatterGuard) {
    throw BudgetError("shattering check limited to m <= " + std::to_string(kShatterGuard));
  }
  const auto& cs = space.concepts();
  bool some_d = false;
  for (Mask subset : masks_of_size(space.m(), space.d())) {
    if (shattered(cs, subset)) {
      some_d = true;
      break;
    }
  }
  if (!some_d) {
    return false;
  }
  for (Mask subset : masks_of_size(space.m(), space.d() + 1)) {
    if (shattered(cs, subset)) {
      return false;
    }
  }
  return true;
}

Mask anchor_mask(std::span<const int> anchors) {
  Mask mask = 0;
  for (int x : anchors) {
    if (x < 0 || x >= kMaxPoints) {
      throw ValidationError("anchor point out of range");
    }
    mask |= Mask{1} << x;
  }
  return mask;
}

std::size_t realizable_patterns(const ConceptSpace& space, std::span<const int> anchors) {
  const Mask mask = anchor_mask(anchors);
  if (space.m() < kMaxPoints && (mask >> space.m()) != 0) {
    throw ValidationError("anchor outside instance space");
  }
  std::unordered_set<Mask> seen;
  for (const Concept& c : space.concepts()) {
    seen.insert(c.positives & mask);
  }
  return seen.size();
}

}  // namespace priorest
