#pragma once

#include "priorest/outcome_dist.hpp"

#include <cstdint>
#include <vector>

namespace priorest {

struct LemmaConfig {
  int m = 3;
  int d = 2;
  double L = 1.0;
  double alpha = 1.0;
  int k_max = 3;      ///< lemma chain depth
  int tree_k = 4;     ///< anchors for the tree inequality
  int sauer_k = 8;    ///< largest k for the pattern count check
  int pairs = 50;     ///< random prior pairs
  bool theorem2 = true;  ///< also chain every pair of the parity family
  std::uint64_t seed = 1;

  void validate() const;
};

struct SmoothnessConfig {
  int m_max = 8;
  int d_max = 3;
  std::vector<double> L_values{0.5, 1.0, 2.0};
  std::vector<double> alpha_values{0.5, 1.0};
  int sign_vectors = 16;  ///< pi_b tested per instance beyond b = +1 and b = -1
  std::uint64_t seed = 1;

  void validate() const;
};

/// Lemma chain, label projection, tree inequality and sqrt bound rows on
/// random prior pairs and parity-family pairs, plus pattern counts.
template <typename Scalar>
std::vector<CheckRow> lemma_suite(const LemmaConfig& cfg);

/// Mass, density range, Holder and anchor-diameter rows for the reference
/// prior and the parity family over every (m, d, L, alpha) in the grid.
template <typename Scalar>
std::vector<CheckRow> smoothness_suite(const SmoothnessConfig& cfg);

}  // namespace priorest
