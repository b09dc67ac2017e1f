#pragma once

#include "priorest/concept_space.hpp"

#include <cmath>
#include <iosfwd>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace priorest {

/// Explicit probability table over an enumerated concept space.
template <typename Scalar = double>
class TabularPrior {
public:
  TabularPrior(SpacePtr space, Vector<Scalar> mass) : space_(std::move(space)), mass_(std::move(mass)) {
    if (!space_) {
      throw ValidationError("prior needs a concept space");
    }
    if (mass_.size() != space_->size()) {
      throw ValidationError("prior table has " + std::to_string(mass_.size()) +
                            " entries for a space of " + std::to_string(space_->size()));
    }
    Scalar total(0);
    for (Eigen::Index i = 0; i < mass_.size(); ++i) {
      if (mass_[i] < Scalar(0)) {
        throw ValidationError("prior masses must be nonnegative");
      }
      total += mass_[i];
    }
    if constexpr (is_exact_v<Scalar>) {
      if (total != Scalar(1)) {
        throw ValidationError("prior masses sum to " + format_rational(total) + ", not 1");
      }
    } else {
      if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("prior masses sum to " + format_double(total) + ", not 1");
      }
    }
  }

  const ConceptSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Vector<Scalar>& mass() const { return mass_; }
  const Scalar& operator[](int i) const { return mass_[i]; }
  int size() const { return static_cast<int>(mass_.size()); }

  Scalar mass_of(Concept h) const {
    const int i = space_->index_of(h);
    return i < 0 ? Scalar(0) : mass_[i];
  }

  TabularPrior<double> as_double() const {
    Eigen::VectorXd out(mass_.size());
    for (Eigen::Index i = 0; i < mass_.size(); ++i) out[i] = to_double(mass_[i]);
    // Rounding may move the total by an ulp or two; still inside tolerance.
    return TabularPrior<double>(space_, std::move(out));
  }

private:
  SpacePtr space_;
  Vector<Scalar> mass_;
};

template <typename Scalar>
void require_same_space(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b) {
  if (!(a.space() == b.space())) {
    throw ValidationError("priors live on different concept spaces");
  }
}

/// Total variation: half the L1 distance between the tables.
template <typename Scalar>
Scalar tv(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b) {
  require_same_space(a, b);
  Scalar sum(0);
  for (int i = 0; i < a.size(); ++i) sum += abs_value<Scalar>(a[i] - b[i]);
  return sum / Scalar(2);
}

template <typename Scalar = double>
TabularPrior<Scalar> point_mass(SpacePtr space, int index) {
  Vector<Scalar> mass = Vector<Scalar>::Zero(space->size());
  if (index < 0 || index >= space->size()) {
    throw ValidationError("point mass index out of range");
  }
  mass[index] = Scalar(1);
  return TabularPrior<Scalar>(std::move(space), std::move(mass));
}

template <typename Scalar = double>
TabularPrior<Scalar> uniform_prior(SpacePtr space) {
  const int n = space->size();
  Vector<Scalar> mass(n);
  for (int i = 0; i < n; ++i) {
    if constexpr (is_exact_v<Scalar>) {
      mass[i] = Rational(1, n);
    } else {
      mass[i] = 1.0 / n;
    }
  }
  return TabularPrior<Scalar>(std::move(space), std::move(mass));
}

/// pi_0({h}) = (1/2)^d C(m-q, d-q) / C(m, d), q = |h|.
template <typename Scalar = double>
TabularPrior<Scalar> reference_prior(SpacePtr space) {
  const int m = space->m();
  const int d = space->d();
  Vector<Scalar> mass(space->size());
  const std::uint64_t cmd = binomial(m, d);
  for (int i = 0; i < space->size(); ++i) {
    const int q = (*space)[i].size();
    const std::uint64_t num = binomial(m - q, d - q);
    if constexpr (is_exact_v<Scalar>) {
      mass[i] = Rational(BigInt(num), BigInt(cmd) << d);
    } else {
      mass[i] = std::ldexp(1.0, -d) * static_cast<double>(num) / static_cast<double>(cmd);
    }
  }
  return TabularPrior<Scalar>(std::move(space), std::move(mass));
}

/// gamma_m = (L/2)(1/m)^alpha.
inline double gamma_for(int m, double L, double alpha) { return (L / 2.0) * std::pow(1.0 / m, alpha); }

/// Parameters of the parity-coded family: one sign per d-subset of {1..m}.
struct SmoothPriorParams {
  int m = 0;
  int d = 0;
  double L = 0.0;
  double alpha = 0.0;
  double gamma_m = 0.0;
  std::vector<int> b;

  /// Validates alpha in (0,1], L > 0, signs in {-1,+1}, |b| = C(m,d) and
  /// gamma_m in (0, 1/2).
  static SmoothPriorParams make(int m, int d, double L, double alpha, std::vector<int> b);

  /// Bit i of `theta` set means b_i = +1. Requires C(m,d) <= 63.
  static SmoothPriorParams from_index(int m, int d, double L, double alpha, std::uint64_t theta);
  std::uint64_t index() const;
};

inline SmoothPriorParams SmoothPriorParams::make(int m, int d, double L, double alpha,
                                                 std::vector<int> b) {
  if (m < 1 || d < 1 || d > m) {
    throw ValidationError("smooth prior needs 1 <= d <= m");
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw ValidationError("Hoelder constant L must be positive");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("Hoelder exponent alpha must lie in (0, 1]");
  }
  if (b.size() != binomial(m, d)) {
    throw ValidationError("sign vector has " + std::to_string(b.size()) + " entries, need C(m,d)=" +
                          std::to_string(binomial(m, d)));
  }
  for (int s : b) {
    if (s != 1 && s != -1) {
      throw ValidationError("sign vector entries must be -1 or +1");
    }
  }
  const double g = gamma_for(m, L, alpha);
  if (!(g > 0.0 && g < 0.5)) {
    throw ValidationError("gamma_m = " + format_double(g) + " outside (0, 1/2)");
  }
  return SmoothPriorParams{m, d, L, alpha, g, std::move(b)};
}

inline SmoothPriorParams SmoothPriorParams::from_index(int m, int d, double L, double alpha,
                                                       std::uint64_t theta) {
  const std::uint64_t n = binomial(m, d);
  if (n > 63) {
    throw BudgetError("sign-vector index needs C(m,d) <= 63");
  }
  std::vector<int> b(n);
  for (std::uint64_t i = 0; i < n; ++i) b[i] = (theta >> i) & 1U ? +1 : -1;
  return make(m, d, L, alpha, std::move(b));
}

inline std::uint64_t SmoothPriorParams::index() const {
  if (b.size() > 63) {
    throw BudgetError("sign-vector index needs C(m,d) <= 63");
  }
  std::uint64_t theta = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] > 0) theta |= std::uint64_t{1} << i;
  }
  return theta;
}

inline void require_matching(const SmoothPriorParams& params, const ConceptSpace& space) {
  if (params.m != space.m() || params.d != space.d()) {
    throw ValidationError("smooth prior parameters do not match the concept space");
  }
}

/// pi_b({h}) = (1/2)^d C(m,d)^{-1} sum_i 1[H in X_i] (1 + gamma b_i)^{odd} (1 - gamma b_i)^{even}.
template <typename Scalar = double>
TabularPrior<Scalar> smooth_prior(const SmoothPriorParams& params, SpacePtr space) {
  require_matching(params, *space);
  const Scalar gamma = from_double<Scalar>(params.gamma_m);
  Vector<Scalar> mass = Vector<Scalar>::Zero(space->size());
  const auto& subsets = space->d_subsets();
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const Scalar shift = params.b[i] > 0 ? gamma : Scalar(-gamma);
    const Scalar odd = Scalar(1) + shift;
    const Scalar even = Scalar(1) - shift;
    const Mask xi = subsets[i];
    // Walk every submask of X_i, including the empty set.
    Mask h = xi;
    while (true) {
      const int idx = space->index_of(Concept{h});
      mass[idx] += (std::popcount(h) % 2 == 1) ? odd : even;
      if (h == 0) break;
      h = (h - 1) & xi;
    }
  }
  const std::uint64_t cmd = binomial(space->m(), space->d());
  Scalar scale;
  if constexpr (is_exact_v<Scalar>) {
    scale = Rational(BigInt(1), BigInt(cmd) << space->d());
  } else {
    scale = std::ldexp(1.0, -space->d()) / static_cast<double>(cmd);
  }
  for (Eigen::Index i = 0; i < mass.size(); ++i) mass[i] *= scale;
  return TabularPrior<Scalar>(std::move(space), std::move(mass));
}

/// Radon-Nikodym derivative prior({h}) / reference({h}); 0/0 is 0.
template <typename Scalar>
Scalar density(const TabularPrior<Scalar>& prior, const TabularPrior<Scalar>& reference, int h) {
  require_same_space(prior, reference);
  if (reference[h] == Scalar(0)) {
    if (prior[h] != Scalar(0)) {
      throw ValidationError("prior is not absolutely continuous w.r.t. the reference");
    }
    return Scalar(0);
  }
  return prior[h] / reference[h];
}

template <typename Scalar>
Scalar density(const TabularPrior<Scalar>& prior, const TabularPrior<Scalar>& reference, Concept h) {
  const int i = prior.space().index_of(h);
  if (i < 0) {
    throw ValidationError("concept outside the class");
  }
  return density(prior, reference, i);
}

template <typename Scalar>
Vector<Scalar> density_table(const TabularPrior<Scalar>& prior, const TabularPrior<Scalar>& reference) {
  Vector<Scalar> out(prior.size());
  for (int i = 0; i < prior.size(); ++i) out[i] = density(prior, reference, i);
  return out;
}

struct HolderReport {
  bool pass = true;
  std::size_t pairs = 0;
  int worst_h = -1;          ///< pair maximizing |f(h)-f(g)| / rho^alpha
  int worst_g = -1;
  double worst_ratio = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();  ///< max of |f(h)-f(g)| - L rho^alpha
};

inline constexpr std::size_t kHolderPairGuard = std::size_t{1} << 16;

/// Checks |f(h) - f(g)| <= L rho(h,g)^alpha over all concept pairs, 1e-12 slack.
template <typename Scalar>
HolderReport holder_check(const TabularPrior<Scalar>& prior, const TabularPrior<Scalar>& reference,
                          double L, double alpha, const DataDistribution& dist) {
  const int n = prior.size();
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  if (pairs > kHolderPairGuard) {
    throw BudgetError("Hoelder check over " + std::to_string(pairs) + " pairs exceeds the guard");
  }
  if (dist.m() != prior.space().m()) {
    throw ValidationError("data distribution does not match the concept space");
  }
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = to_double(density(prior, reference, i));

  HolderReport report;
  report.pairs = pairs;
  const auto& cs = prior.space().concepts();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double diff = std::abs(f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)]);
      const double r = rho(cs[static_cast<std::size_t>(i)], cs[static_cast<std::size_t>(j)], dist);
      const double scale = std::pow(r, alpha);
      const double excess = diff - L * scale;
      const double ratio = scale > 0.0 ? diff / scale : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (ratio > report.worst_ratio || report.worst_h < 0) {
        report.worst_ratio = ratio;
        report.worst_h = i;
        report.worst_g = j;
      }
      report.worst_excess = std::max(report.worst_excess, excess);
      if (excess > 1e-12) {
        report.pass = false;
      }
    }
  }
  return report;
}

/// Prior rebuilt to be constant-density (w.r.t. the reference) on each class of
/// concepts that agree on the anchor points, keeping every class's mass.
template <typename Scalar = double>
struct PartitionSmoothedPrior {
  TabularPrior<Scalar> base;
  std::vector<int> anchors;        ///< 0-based points, repeats allowed
  Mask anchor_set = 0;
  std::vector<int> cell_of;        ///< concept index -> cell index
  std::vector<Mask> cell_pattern;  ///< positives restricted to the anchor set
  Vector<Scalar> cell_mass;        ///< base mass of each cell
  TabularPrior<Scalar> smoothed;

  int cells() const { return static_cast<int>(cell_pattern.size()); }
};

template <typename Scalar>
PartitionSmoothedPrior<Scalar> smooth_projection(const TabularPrior<Scalar>& prior,
                                                 std::vector<int> anchors,
                                                 const TabularPrior<Scalar>& reference) {
  require_same_space(prior, reference);
  if (anchors.empty()) {
    throw ValidationError("smooth_projection needs at least one anchor point");
  }
  const ConceptSpace& space = prior.space();
  for (int x : anchors) {
    if (x < 0 || x >= space.m()) {
      throw ValidationError("anchor point outside the instance space");
    }
  }
  const Mask aset = anchor_mask(anchors);
  std::vector<int> cell_of(static_cast<std::size_t>(space.size()));
  std::vector<Mask> patterns;
  std::unordered_map<Mask, int> lookup;
  for (int i = 0; i < space.size(); ++i) {
    const Mask p = space[i].positives & aset;
    auto [it, inserted] = lookup.emplace(p, static_cast<int>(patterns.size()));
    if (inserted) patterns.push_back(p);
    cell_of[static_cast<std::size_t>(i)] = it->second;
  }
  const int ncells = static_cast<int>(patterns.size());
  Vector<Scalar> cell_mass = Vector<Scalar>::Zero(ncells);
  Vector<Scalar> cell_ref = Vector<Scalar>::Zero(ncells);
  for (int i = 0; i < space.size(); ++i) {
    cell_mass[cell_of[static_cast<std::size_t>(i)]] += prior[i];
    cell_ref[cell_of[static_cast<std::size_t>(i)]] += reference[i];
  }
  Vector<Scalar> smoothed(space.size());
  for (int i = 0; i < space.size(); ++i) {
    const int c = cell_of[static_cast<std::size_t>(i)];
    if (cell_ref[c] == Scalar(0)) {
      if (cell_mass[c] != Scalar(0)) {
        throw ValidationError("prior puts mass on a cell the reference does not charge");
      }
      smoothed[i] = Scalar(0);
    } else {
      smoothed[i] = reference[i] * cell_mass[c] / cell_ref[c];
    }
  }
  return PartitionSmoothedPrior<Scalar>{prior,
                                        std::move(anchors),
                                        aset,
                                        std::move(cell_of),
                                        std::move(patterns),
                                        std::move(cell_mass),
                                        TabularPrior<Scalar>(prior.space_ptr(), std::move(smoothed))};
}

template <typename Scalar>
PartitionSmoothedPrior<Scalar> smooth_projection(const TabularPrior<Scalar>& prior, std::vector<int> anchors) {
  return smooth_projection(prior, std::move(anchors), reference_prior<Scalar>(prior.space_ptr()));
}

/// Largest rho-diameter among the cells of a partition.
template <typename Scalar>
double max_cell_diameter(const PartitionSmoothedPrior<Scalar>& part, const DataDistribution& dist) {
  const auto& cs = part.base.space().concepts();
  double worst = 0.0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      if (part.cell_of[i] == part.cell_of[j]) worst = std::max(worst, rho(cs[i], cs[j], dist));
    }
  }
  return worst;
}

/// Finite list of priors standing in for a family at resolution epsilon.
struct CoverFamily {
  std::vector<TabularPrior<double>> members;
  double epsilon = 0.0;
  std::vector<std::string> labels;  ///< one per member, for reports

  int size() const { return static_cast<int>(members.size()); }
};

/// Constant c in the anchor count k = c (d/gamma) log(1/gamma).
inline constexpr double kAnchorConstant = 4.0;

/// ceil(c (d/gamma) log(1/gamma)), at least 1; gamma in (0, 1).
int anchor_count(int d, double gamma, double c = kAnchorConstant);

struct DiameterReport {
  int k = 0;
  std::size_t trials = 0;
  std::size_t small = 0;          ///< draws whose cells all have rho-diameter < gamma
  double frequency = 0.0;
  double max_density_gap = 0.0;   ///< max |f - f'| over the small draws
  double gap_bound = 0.0;         ///< L gamma^alpha
  bool pass = false;              ///< frequency > 1 - gamma and every gap below the bound
};

/// Draws k anchors i.i.d. from dist, `trials` times, and checks the
/// small-diameter event and the density gap of the projection on it.
DiameterReport diameter_check(const TabularPrior<double>& prior, const DataDistribution& dist, double L,
                              double alpha, double gamma, int k, std::size_t trials, std::uint64_t seed);

/// Every sign vector of the parity-coded family, in index order (epsilon = 0).
CoverFamily theorem2_family(SpacePtr space, double L, double alpha, std::size_t max_members = 4096);

/// Greedy epsilon-net of a finite list: a member joins unless some chosen
/// member is within epsilon in total variation.
CoverFamily net_cover(const std::vector<TabularPrior<double>>& candidates, double epsilon);

/// Grid cover of every (L, alpha)-smooth prior w.r.t. pi_0: concepts grouped
/// into rho-balls of radius r/2 with r = (epsilon/L)^{1/alpha}, per-cell
/// density on a grid of step epsilon/2, then renormalized. Throws BudgetError
/// once more than `max_members` distinct members are found, or once the search
/// visits more than 1000 nodes per allowed member (never fewer than 10^6).
CoverFamily cover_priors(SpacePtr space, double L, double alpha, double epsilon,
                         const DataDistribution& dist, std::size_t max_members = 100000);
CoverFamily cover_priors(SpacePtr space, double L, double alpha, double epsilon,
                         std::size_t max_members = 100000);

/// `mask<TAB>mass` lines, one per concept in enumeration order.
template <typename Scalar>
void write_prior(std::ostream& out, const TabularPrior<Scalar>& prior) {
  for (int i = 0; i < prior.size(); ++i) {
    out << prior.space()[i].positives << '\t' << format_scalar(prior[i]) << '\n';
  }
}

/// Reads `mask<TAB>mass` lines; concepts not listed get zero mass.
template <typename Scalar>
TabularPrior<Scalar> read_prior(std::istream& in, SpacePtr space) {
  Vector<Scalar> mass = Vector<Scalar>::Zero(space->size());
  std::vector<bool> seen(static_cast<std::size_t>(space->size()), false);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError("prior table line " + std::to_string(lineno) + ": expected mask<TAB>mass");
    }
    Mask mask = 0;
    try {
      std::size_t used = 0;
      mask = std::stoull(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("prior table line " + std::to_string(lineno) + ": bad mask");
    }
    const int idx = space->index_of(Concept{mask});
    if (idx < 0) {
      throw ValidationError("prior table line " + std::to_string(lineno) + ": mask outside the class");
    }
    if (seen[static_cast<std::size_t>(idx)]) {
      throw ValidationError("prior table line " + std::to_string(lineno) + ": duplicate mask");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    mass[idx] = parse_scalar<Scalar>(line.substr(tab + 1));
  }
  return TabularPrior<Scalar>(std::move(space), std::move(mass));
}

}  // namespace priorest
