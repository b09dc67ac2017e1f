#include "priorest/prior_family.hpp"

#include "priorest/rng.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

namespace priorest {

CoverFamily theorem2_family(SpacePtr space, double L, double alpha, std::size_t max_members) {
  const std::uint64_t n = binomial(space->m(), space->d());
  if (n > 63 || (std::uint64_t{1} << n) > max_members) {
    throw BudgetError("parity-coded family has 2^" + std::to_string(n) + " members, above the budget of " +
                      std::to_string(max_members));
  }
  CoverFamily family;
  family.epsilon = 0.0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t theta = 0; theta < count; ++theta) {
    const auto params = SmoothPriorParams::from_index(space->m(), space->d(), L, alpha, theta);
    family.members.push_back(smooth_prior<double>(params, space));
    family.labels.push_back("b" + std::to_string(theta));
  }
  return family;
}

CoverFamily net_cover(const std::vector<TabularPrior<double>>& candidates, double epsilon) {
  if (epsilon < 0.0) {
    throw ValidationError("cover resolution must be nonnegative");
  }
  CoverFamily family;
  family.epsilon = epsilon;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool covered = false;
    for (const auto& chosen : family.members) {
      if (tv(chosen, candidates[i]) <= epsilon) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      family.members.push_back(candidates[i]);
      family.labels.push_back("c" + std::to_string(i));
    }
  }
  return family;
}

CoverFamily cover_priors(SpacePtr space, double L, double alpha, double epsilon, std::size_t max_members) {
  return cover_priors(space, L, alpha, epsilon, DataDistribution::uniform(space->m()), max_members);
}

CoverFamily cover_priors(SpacePtr space, double L, double alpha, double epsilon,
                         const DataDistribution& dist, std::size_t max_members) {
  if (!(epsilon > 0.0)) {
    throw ValidationError("cover resolution epsilon must be positive");
  }
  if (!(L > 0.0) || !(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("cover needs L > 0 and alpha in (0, 1]");
  }
  if (dist.m() != space->m()) {
    throw ValidationError("data distribution does not match the concept space");
  }
  const auto& cs = space->concepts();
  const int n = space->size();
  const double diameter = std::pow(epsilon / L, 1.0 / alpha);
  const double radius = diameter / 2.0;

  // Greedy rho-balls: every concept within `radius` of its center.
  std::vector<int> cell_of(static_cast<std::size_t>(n), -1);
  std::vector<int> centers;
  for (int c = 0; c < n; ++c) {
    if (cell_of[static_cast<std::size_t>(c)] >= 0) continue;
    const int cell = static_cast<int>(centers.size());
    centers.push_back(c);
    for (int h = c; h < n; ++h) {
      if (cell_of[static_cast<std::size_t>(h)] < 0 &&
          rho(cs[static_cast<std::size_t>(c)], cs[static_cast<std::size_t>(h)], dist) <= radius) {
        cell_of[static_cast<std::size_t>(h)] = cell;
      }
    }
  }
  const int ncells = static_cast<int>(centers.size());
  const auto ref = reference_prior<double>(space);
  std::vector<double> cell_ref(static_cast<std::size_t>(ncells), 0.0);
  for (int h = 0; h < n; ++h) cell_ref[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(h)])] += ref[h];

  const double step = epsilon / 2.0;
  const int top = static_cast<int>(std::ceil((1.0 + L) / step));
  // The rounding of a smooth density f satisfies these two filters, so the
  // member nearest to f survives pruning.
  const double pair_slack = step;
  const double mass_slack = L * std::pow(radius, alpha) + step / 2.0;

  std::vector<std::vector<double>> bound(static_cast<std::size_t>(ncells),
                                         std::vector<double>(static_cast<std::size_t>(ncells)));
  for (int a = 0; a < ncells; ++a) {
    for (int b = 0; b < ncells; ++b) {
      const double r = rho(cs[static_cast<std::size_t>(centers[static_cast<std::size_t>(a)])],
                           cs[static_cast<std::size_t>(centers[static_cast<std::size_t>(b)])], dist);
      bound[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = L * std::pow(r, alpha) + pair_slack;
    }
  }
  std::vector<double> suffix_ref(static_cast<std::size_t>(ncells) + 1, 0.0);
  for (int a = ncells - 1; a >= 0; --a) {
    suffix_ref[static_cast<std::size_t>(a)] = suffix_ref[static_cast<std::size_t>(a) + 1] + cell_ref[static_cast<std::size_t>(a)];
  }

  std::set<std::vector<int>> primitive;
  std::vector<int> grid(static_cast<std::size_t>(ncells), 0);
  // Sparse trees can run long before the member budget trips.
  const std::size_t node_budget = std::max<std::size_t>(max_members, 1000) * 1000;
  std::size_t nodes = 0;
  std::function<void(int, double)> visit = [&](int a, double partial) {
    if (++nodes > node_budget) {
      throw BudgetError("grid cover search exceeds " + std::to_string(node_budget) + " nodes");
    }
    if (a == ncells) {
      if (std::abs(partial - 1.0) > mass_slack + 1e-12) return;
      int g = 0;
      for (int v : grid) g = std::gcd(g, v);
      if (g == 0) return;
      std::vector<int> key(grid);
      for (int& v : key) v /= g;
      primitive.insert(std::move(key));
      if (primitive.size() > max_members) {
        throw BudgetError("grid cover exceeds the budget of " + std::to_string(max_members) + " members");
      }
      return;
    }
    const double rest = suffix_ref[static_cast<std::size_t>(a) + 1];
    for (int j = 0; j <= top; ++j) {
      const double value = j * step;
      bool ok = true;
      for (int b = 0; b < a && ok; ++b) {
        const double other = grid[static_cast<std::size_t>(b)] * step;
        if (std::abs(value - other) > bound[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] + 1e-12) ok = false;
      }
      if (!ok) continue;
      const double lo = partial + cell_ref[static_cast<std::size_t>(a)] * value;
      const double hi = lo + rest * top * step;
      if (lo > 1.0 + mass_slack + 1e-12) break;
      if (hi < 1.0 - mass_slack - 1e-12) continue;
      grid[static_cast<std::size_t>(a)] = j;
      visit(a + 1, lo);
    }
    grid[static_cast<std::size_t>(a)] = 0;
  };
  visit(0, 0.0);

  CoverFamily family;
  family.epsilon = epsilon;
  for (const auto& key : primitive) {
    double total = 0.0;
    for (int a = 0; a < ncells; ++a) total += cell_ref[static_cast<std::size_t>(a)] * key[static_cast<std::size_t>(a)];
    Eigen::VectorXd mass(n);
    for (int h = 0; h < n; ++h) {
      mass[h] = ref[h] * key[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(h)])] / total;
    }
    // Renormalize once more so the table sums to one within rounding.
    mass /= mass.sum();
    family.members.emplace_back(space, std::move(mass));
    std::string label = "g";
    for (std::size_t a = 0; a < key.size(); ++a) label += (a ? "-" : "") + std::to_string(key[a]);
    family.labels.push_back(std::move(label));
  }
  return family;
}

int anchor_count(int d, double gamma, double c) {
  if (!(gamma > 0.0 && gamma < 1.0) || d < 1 || !(c > 0.0)) {
    throw ValidationError("anchor count needs d >= 1, c > 0 and gamma in (0, 1)");
  }
  return std::max(1, static_cast<int>(std::ceil(c * (d / gamma) * std::log(1.0 / gamma))));
}

DiameterReport diameter_check(const TabularPrior<double>& prior, const DataDistribution& dist, double L,
                              double alpha, double gamma, int k, std::size_t trials, std::uint64_t seed) {
  if (k < 1 || trials < 1) {
    throw ValidationError("diameter check needs k >= 1 and trials >= 1");
  }
  if (dist.m() != prior.space().m()) {
    throw ValidationError("data distribution does not match the concept space");
  }
  const auto reference = reference_prior<double>(prior.space_ptr());
  const Eigen::VectorXd f = density_table(prior, reference);
  std::vector<double> cumulative(static_cast<std::size_t>(dist.m()));
  std::partial_sum(dist.weights().begin(), dist.weights().end(), cumulative.begin());
  DiameterReport report;
  report.k = k;
  report.trials = trials;
  report.gap_bound = L * std::pow(gamma, alpha);
  bool gaps_ok = true;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t, Purpose::point_draw);
    std::vector<int> anchors(static_cast<std::size_t>(k));
    for (auto& x : anchors) {
      const double u = rng.uniform() * cumulative.back();
      x = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      x = std::min(x, dist.m() - 1);
    }
    const auto part = smooth_projection(prior, anchors, reference);
    if (!(max_cell_diameter(part, dist) < gamma)) continue;
    ++report.small;
    const Eigen::VectorXd fp = density_table(part.smoothed, reference);
    const double gap = (f - fp).cwiseAbs().maxCoeff();
    report.max_density_gap = std::max(report.max_density_gap, gap);
    if (!(gap < report.gap_bound)) gaps_ok = false;
  }
  report.frequency = static_cast<double>(report.small) / static_cast<double>(trials);
  report.pass = report.frequency > 1.0 - gamma && gaps_ok;
  return report;
}

}  // namespace priorest
