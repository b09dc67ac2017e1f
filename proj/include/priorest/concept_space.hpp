#pragma once

#include "priorest/scalar.hpp"

#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace priorest {

/// Bit j of a mask stands for instance point j+1 of X = {1,...,m}.
using Mask = std::uint64_t;

inline constexpr int kMaxPoints = 64;
inline constexpr int kShatterGuard = 12;

/// A classifier on {1..m}, stored as its set of positive points.
struct Concept {
  Mask positives = 0;

  int size() const { return std::popcount(positives); }
  /// Label of the 0-based point x: +1 or -1.
  int label(int x) const { return (positives >> x) & 1U ? +1 : -1; }
  bool operator==(const Concept&) const = default;
};

/// All masks with exactly `q` bits among the low `m`, ascending.
std::vector<Mask> masks_of_size(int m, int q);

/// C_{m,d}: every concept on {1..m} with at most d positive points.
/// Enumeration order is by size, then ascending mask value.
class ConceptSpace {
public:
  ConceptSpace(int m, int d);

  int m() const { return m_; }
  int d() const { return d_; }
  int size() const { return static_cast<int>(concepts_.size()); }
  const std::vector<Concept>& concepts() const { return concepts_; }
  const Concept& operator[](int i) const { return concepts_[static_cast<std::size_t>(i)]; }

  /// Index of a concept, or -1 if it lies outside the class.
  int index_of(Concept h) const;

  /// The d-subsets X_1, ..., X_{C(m,d)} as masks (ascending mask value).
  const std::vector<Mask>& d_subsets() const { return d_subsets_; }

  bool operator==(const ConceptSpace& other) const { return m_ == other.m_ && d_ == other.d_; }

private:
  int m_;
  int d_;
  std::vector<Concept> concepts_;
  std::vector<Mask> d_subsets_;
  std::unordered_map<Mask, int> index_;
};

using SpacePtr = std::shared_ptr<const ConceptSpace>;

/// Rejects d < 1, d > m, and m beyond the mask width.
SpacePtr enumerate_concepts(int m, int d);

/// Categorical law on {1..m}; weights strictly positive, summing to one.
class DataDistribution {
public:
  explicit DataDistribution(Eigen::VectorXd weights);
  static DataDistribution uniform(int m);

  int m() const { return static_cast<int>(weights_.size()); }
  double weight(int x) const { return weights_[x]; }
  const Eigen::VectorXd& weights() const { return weights_; }
  bool is_uniform() const { return uniform_; }

  /// D-mass of a set of points.
  double mass(Mask points) const;

  /// Exact weights, for rational-mode enumeration. Uniform weights are 1/m;
  /// otherwise the exact value of each double.
  template <typename Scalar>
  Scalar weight_as(int x) const {
    if constexpr (is_exact_v<Scalar>) {
      if (uniform_) {
        return Rational(1, m());
      }
    }
    return from_double<Scalar>(weights_[x]);
  }

private:
  Eigen::VectorXd weights_;
  bool uniform_ = false;
};

/// rho(h, g) = D({x : h(x) != g(x)}).
double rho(Concept h, Concept g, const DataDistribution& dist);

/// Largest shattered subset size for an arbitrary finite list of concepts on
/// {1..m}. Brute force; refuses m above the shattering guard.
int vc_dimension(std::span<const Concept> concepts, int m);

/// True iff some d-subset is shattered and no (d+1)-subset is.
bool verify_vc_dimension(const ConceptSpace& space);

/// Number of distinct labelings the space induces on the given (0-based)
/// anchor points. Repeated anchors add no patterns.
std::size_t realizable_patterns(const ConceptSpace& space, std::span<const int> anchors);

Mask anchor_mask(std::span<const int> anchors);

}  // namespace priorest
