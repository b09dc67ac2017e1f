#include "priorest/suites.hpp"

#include "priorest/concept_space.hpp"
#include "priorest/rng.hpp"

#include <algorithm>
#include <cmath>

namespace priorest {

namespace {

std::string instance_name(int m, int d, double L, double alpha) {
  return "m=" + std::to_string(m) + ";d=" + std::to_string(d) + ";L=" + format_double(L) + ";alpha=" + format_double(alpha);
}

// Integer weights in 0..20 normalized, so the same pair exists in both modes.
template <typename Scalar>
TabularPrior<Scalar> random_prior(SpacePtr space, Rng& rng) {
  std::vector<std::uint64_t> w(static_cast<std::size_t>(space->size()));
  std::uint64_t total = 0;
  while (total == 0) {
    total = 0;
    for (auto& x : w) {
      x = rng.below(21);
      total += x;
    }
  }
  Vector<Scalar> mass(space->size());
  for (int i = 0; i < space->size(); ++i) {
    if constexpr (is_exact_v<Scalar>) {
      mass[i] = Rational(BigInt(w[static_cast<std::size_t>(i)]), BigInt(total));
    } else {
      mass[i] = static_cast<double>(w[static_cast<std::size_t>(i)]) / static_cast<double>(total);
    }
  }
  if constexpr (!is_exact_v<Scalar>) mass /= mass.sum();
  return TabularPrior<Scalar>(std::move(space), std::move(mass));
}

template <typename Scalar>
bool same_value(const Scalar& a, const Scalar& b) {
  if constexpr (is_exact_v<Scalar>) {
    return a == b;
  } else {
    return std::abs(a - b) <= 1e-12;
  }
}

template <typename Scalar>
void pair_checks(const TabularPrior<Scalar>& a, const TabularPrior<Scalar>& b, const std::string& name,
                 const LemmaConfig& cfg, const DataDistribution& dist, Rng& rng, std::vector<CheckRow>& rows) {
  const auto chain = verify_lemma_chain(a, b, dist, cfg.k_max);
  const double prior_tv = to_double(chain.prior_tv);
  for (int k = 1; k <= cfg.k_max; ++k) {
    const double value = to_double(chain.outcome_tv[static_cast<std::size_t>(k - 1)]);
    const bool step_ok = k == 1 || !(chain.outcome_tv[static_cast<std::size_t>(k - 1)] +
                                         from_double<Scalar>(mass_tolerance<Scalar>()) <
                                     chain.outcome_tv[static_cast<std::size_t>(k - 2)]);
    const bool bounded = !(chain.outcome_tv[static_cast<std::size_t>(k - 1)] >
                           chain.prior_tv + from_double<Scalar>(mass_tolerance<Scalar>()));
    rows.push_back({"lemma_chain", name, k, value, prior_tv, step_ok && bounded});
  }
  const int m = a.space().m();
  std::vector<int> anchors(static_cast<std::size_t>(cfg.tree_k));
  for (auto& x : anchors) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
  const Scalar lct = label_conditional_tv(a, b, anchors);
  const Scalar proj = tv(smooth_projection(a, anchors).smoothed, smooth_projection(b, anchors).smoothed);
  rows.push_back({"label_projection", name, cfg.tree_k, to_double(lct), to_double(proj), same_value(lct, proj)});
  const auto tree = verify_tree_inequality(a, b, anchors, cfg.d);
  rows.push_back({"tree_inequality", name, cfg.tree_k, to_double(tree.lhs), tree.rhs, tree.pass});
  const auto sq = verify_sqrt_bound(a, b, dist, cfg.d);
  double worst = 0.0;
  for (const auto& l : sq.lhs) worst = std::max(worst, to_double(l));
  rows.push_back({"sqrt_bound", name, cfg.d, worst, sq.rhs, sq.pass});
}

template <typename Scalar>
void prior_checks(const TabularPrior<Scalar>& prior, const TabularPrior<Scalar>& reference,
                  const SmoothPriorParams& params, const DataDistribution& dist, const std::string& name,
                  std::vector<CheckRow>& rows) {
  Scalar total(0);
  for (int i = 0; i < prior.size(); ++i) total += prior[i];
  const bool sum_ok = is_exact_v<Scalar> ? total == Scalar(1) : std::abs(to_double(total) - 1.0) <= 1e-12;
  rows.push_back({"prior_sum", name, 0, to_double(total), 1.0, sum_ok});
  const Scalar g = from_double<Scalar>(params.gamma_m);
  const Scalar slack = from_double<Scalar>(mass_tolerance<Scalar>());
  const Vector<Scalar> f = density_table(prior, reference);
  bool range_ok = true;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f[i] < Scalar(1) - g - slack || f[i] > Scalar(1) + g + slack) range_ok = false;
    worst = std::max(worst, std::abs(to_double(f[i]) - 1.0));
  }
  rows.push_back({"density_range", name, 0, worst, params.gamma_m, range_ok});
  const auto h = holder_check(prior, reference, params.L, params.alpha, dist);
  rows.push_back({"holder", name, 0, h.worst_ratio, params.L, h.pass});
}

}  // namespace

void LemmaConfig::validate() const {
  if (m < 1 || d < 1 || d > m || m > 8) {
    throw ValidationError("lemmas need 1 <= d <= m <= 8");
  }
  if (k_max < 1 || tree_k < d || sauer_k < 1 || pairs < 0) {
    throw ValidationError("lemmas need k_max >= 1, tree_k >= d, sauer_k >= 1 and pairs >= 0");
  }
  if (!(L > 0.0) || !(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("need L > 0 and 0 < alpha <= 1");
  }
}

void SmoothnessConfig::validate() const {
  if (m_max < 1 || m_max > 16 || d_max < 1) {
    throw ValidationError("smoothness needs 1 <= m_max <= 16 and d_max >= 1");
  }
  if (L_values.empty() || alpha_values.empty()) {
    throw ValidationError("L_values and alpha_values must be nonempty");
  }
  for (double L : L_values) {
    if (!(L > 0.0)) throw ValidationError("every L must be positive");
  }
  for (double a : alpha_values) {
    if (!(a > 0.0 && a <= 1.0)) throw ValidationError("every alpha must lie in (0, 1]");
  }
  if (sign_vectors < 0) {
    throw ValidationError("sign_vectors must be nonnegative");
  }
}

template <typename Scalar>
std::vector<CheckRow> lemma_suite(const LemmaConfig& cfg) {
  const SpacePtr space = enumerate_concepts(cfg.m, cfg.d);
  const auto dist = DataDistribution::uniform(cfg.m);
  std::vector<CheckRow> rows;
  Rng rng(cfg.seed, 0, Purpose::truths);
  for (int p = 0; p < cfg.pairs; ++p) {
    const auto a = random_prior<Scalar>(space, rng);
    const auto b = random_prior<Scalar>(space, rng);
    pair_checks(a, b, "random" + std::to_string(p), cfg, dist, rng, rows);
  }
  if (cfg.theorem2) {
    const std::uint64_t count = std::uint64_t{1} << binomial(cfg.m, cfg.d);
    if (binomial(cfg.m, cfg.d) > 10) {
      throw BudgetError("theorem2 pairs need C(m,d) <= 10");
    }
    std::vector<TabularPrior<Scalar>> members;
    for (std::uint64_t t = 0; t < count; ++t) {
      members.push_back(smooth_prior<Scalar>(SmoothPriorParams::from_index(cfg.m, cfg.d, cfg.L, cfg.alpha, t), space));
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        pair_checks(members[i], members[j], "b" + std::to_string(i) + "_b" + std::to_string(j), cfg, dist, rng, rows);
      }
    }
  }
  for (int k = 1; k <= cfg.sauer_k; ++k) {
    std::vector<int> anchors(static_cast<std::size_t>(k));
    for (auto& x : anchors) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.m)));
    const auto s = sauer_check(*space, anchors);
    rows.push_back({"sauer", instance_name(cfg.m, cfg.d, cfg.L, cfg.alpha), k, static_cast<double>(s.patterns),
                    s.bound, s.pass});
  }
  return rows;
}

template <typename Scalar>
std::vector<CheckRow> smoothness_suite(const SmoothnessConfig& cfg) {
  std::vector<CheckRow> rows;
  Rng rng(cfg.seed, 0, Purpose::signs);
  for (int m = 1; m <= cfg.m_max; ++m) {
    for (int d = 1; d <= std::min(cfg.d_max, m); ++d) {
      const SpacePtr space = enumerate_concepts(m, d);
      const auto dist = DataDistribution::uniform(m);
      const auto reference = reference_prior<Scalar>(space);
      Scalar total(0);
      for (int i = 0; i < reference.size(); ++i) total += reference[i];
      rows.push_back({"reference_sum", "m=" + std::to_string(m) + ";d=" + std::to_string(d), 0, to_double(total),
                      1.0, is_exact_v<Scalar> ? total == Scalar(1) : std::abs(to_double(total) - 1.0) <= 1e-12});
      const std::uint64_t C = binomial(m, d);
      for (double L : cfg.L_values) {
        for (double alpha : cfg.alpha_values) {
          const std::string base = instance_name(m, d, L, alpha);
          const double gamma = gamma_for(m, L, alpha);
          if (!(gamma > 0.0 && gamma < 0.5)) {
            bool rejected = false;
            try {
              SmoothPriorParams::from_index(m, d, L, alpha, 0);
            } catch (const ValidationError&) {
              rejected = true;
            }
            rows.push_back({"gamma_rejected", base, 0, gamma, 0.5, rejected});
            continue;
          }
          std::vector<std::uint64_t> thetas{0, C >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << C) - 1};
          for (int s = 0; s < cfg.sign_vectors; ++s) thetas.push_back(rng() & thetas[1]);
          for (std::uint64_t theta : thetas) {
            const auto params = SmoothPriorParams::from_index(m, d, L, alpha, theta);
            const auto prior = smooth_prior<Scalar>(params, space);
            prior_checks(prior, reference, params, dist, base + ";b=" + std::to_string(theta), rows);
          }
          const auto plus = smooth_prior<double>(SmoothPriorParams::from_index(m, d, L, alpha, thetas[1]), space);
          const auto diam = diameter_check(plus, dist, L, alpha, gamma, anchor_count(d, gamma), 50,
                                           derive_seed({cfg.seed, static_cast<std::uint64_t>(m),
                                                        static_cast<std::uint64_t>(d)}));
          rows.push_back({"diameter_event", base, diam.k, diam.frequency, 1.0 - gamma, diam.frequency > 1.0 - gamma});
          rows.push_back({"projection_gap", base, diam.k, diam.max_density_gap, diam.gap_bound,
                          diam.small == 0 || diam.max_density_gap < diam.gap_bound});
        }
      }
    }
  }
  return rows;
}
template std::vector<CheckRow> lemma_suite<double>(const LemmaConfig&);
template std::vector<CheckRow> lemma_suite<Rational>(const LemmaConfig&);
template std::vector<CheckRow> smoothness_suite<double>(const SmoothnessConfig&);
template std::vector<CheckRow> smoothness_suite<Rational>(const SmoothnessConfig&);

}  // namespace priorest
