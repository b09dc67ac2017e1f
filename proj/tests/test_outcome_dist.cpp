#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "priorest/outcome_dist.hpp"

using namespace priorest;

namespace {

// P(xs, ys) by looping over concepts.
Rational brute_outcome(const TabularPrior<Rational>& prior, const std::vector<Rational>& w, const std::vector<int>& xs,
                       const std::vector<int>& ys) {
  Rational px = 1;
  for (int x : xs) px *= w[static_cast<std::size_t>(x)];
  Rational cell = 0;
  for (int i = 0; i < prior.size(); ++i) {
    bool agree = true;
    for (std::size_t j = 0; j < xs.size(); ++j) agree = agree && prior.space()[i].label(xs[j]) == ys[j];
    if (agree) cell += prior[i];
  }
  return px * cell;
}

TabularPrior<Rational> random_prior(SpacePtr space, Rng& rng) {
  Vector<Rational> mass(space->size());
  long total = 0;
  std::vector<long> w(static_cast<std::size_t>(space->size()));
  for (auto& x : w) total += (x = static_cast<long>(rng.below(9)) + 1);
  for (int i = 0; i < space->size(); ++i) mass[i] = Rational(w[static_cast<std::size_t>(i)], total);
  return TabularPrior<Rational>(std::move(space), std::move(mass));
}

}  // namespace

TEST_CASE("reference prior outcome on (2,1)") {
  const auto space = enumerate_concepts(2, 1);
  const auto p = exact_outcome_dist(reference_prior<Rational>(space), DataDistribution::uniform(2), 1);
  const std::vector<int> xs{0}, ys{1};
  CHECK(p.at(outcome_key(xs, ys, 2)) == Rational(1, 8));
  CHECK(p.total() == 1);
}

TEST_CASE("outcome tables agree with enumeration over concepts") {
  Eigen::VectorXd w(3);
  w << 0.5, 0.25, 0.25;
  const DataDistribution dist(w);
  const std::vector<Rational> wq{Rational(1, 2), Rational(1, 4), Rational(1, 4)};
  const auto space = enumerate_concepts(3, 2);
  Rng rng(1);
  for (int rep = 0; rep < 3; ++rep) {
    const auto prior = random_prior(space, rng);
    for (int k = 1; k <= 3; ++k) {
      const auto p = exact_outcome_dist(prior, dist, k);
      CHECK(p.total() == 1);
      std::vector<int> xs, ys;
      std::uint64_t tuples = 1;
      for (int j = 0; j < k; ++j) tuples *= 6;
      Rational marginal_check = 0;
      for (std::uint64_t key = 0; key < tuples; ++key) {
        decode_outcome_key(key, 3, k, xs, ys);
        CHECK(outcome_key(xs, ys, 3) == key);
        CHECK(p.at(key) == brute_outcome(prior, wq, xs, ys));
      }
      // Marginal over labels is D^k.
      for (int x0 = 0; x0 < 3; ++x0) {
        Rational sum = 0;
        for (std::uint64_t key : p.keys) {
          decode_outcome_key(key, 3, k, xs, ys);
          if (xs[0] == x0) sum += p.at(key);
        }
        CHECK(sum == wq[static_cast<std::size_t>(x0)]);
      }
    }
  }
}

TEST_CASE("point mass outcomes are deterministic labels") {
  const auto space = enumerate_concepts(3, 1);
  const auto p = exact_outcome_dist(point_mass<Rational>(space, 2), DataDistribution::uniform(3), 2);
  std::vector<int> xs, ys;
  for (std::uint64_t key = 0; key < 36; ++key) {
    decode_outcome_key(key, 3, 2, xs, ys);
    const bool consistent = ys[0] == (*space)[2].label(xs[0]) && ys[1] == (*space)[2].label(xs[1]);
    CHECK(p.at(key) == (consistent ? Rational(1, 9) : Rational(0)));
  }
}

TEST_CASE("total variation examples") {
  const auto space = enumerate_concepts(2, 1);
  const auto ref = reference_prior<Rational>(space);
  const auto empty = point_mass<Rational>(space, 0);
  CHECK(tv(ref, ref) == 0);
  CHECK(tv(point_mass<Rational>(space, 1), point_mass<Rational>(space, 2)) == 1);
  CHECK(tv(ref, empty) == Rational(1, 2));
  const auto u = DataDistribution::uniform(2);
  CHECK(tv(exact_outcome_dist(ref, u, 2), exact_outcome_dist(ref, u, 2)) == 0);
  CHECK_THROWS_AS(tv(ref, reference_prior<Rational>(enumerate_concepts(3, 1))), ValidationError);
}

TEST_CASE("outcome budget") {
  CHECK_THROWS_AS(check_outcome_budget(10, 8, kOutcomeBudget), BudgetError);
  CHECK_NOTHROW(check_outcome_budget(3, 3, kOutcomeBudget));
}

TEST_CASE("label-conditional distance equals the projected prior distance") {
  Rng rng(2);
  const auto space = enumerate_concepts(4, 2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = random_prior(space, rng);
    const auto b = random_prior(space, rng);
    CHECK(label_conditional_tv(a, a, std::vector<int>{0, 1}) == 0);
    CHECK(label_conditional_tv(a, b, std::vector<int>{0, 1, 2, 3}) == tv(a, b));
    for (int k = 1; k <= 4; ++k) {
      std::vector<int> anchors(static_cast<std::size_t>(k));
      for (auto& x : anchors) x = static_cast<int>(rng.below(4));
      CHECK(label_conditional_tv(a, b, anchors) ==
            tv(smooth_projection(a, anchors).smoothed, smooth_projection(b, anchors).smoothed));
    }
  }
}

TEST_CASE("tree inequality") {
  const auto s31 = enumerate_concepts(3, 1);
  const auto ref = reference_prior<Rational>(s31);
  const std::vector<int> two{0, 2};
  const auto same = verify_tree_inequality(ref, ref, two, 1);
  CHECK(same.pass);
  CHECK(same.lhs == 0);
  const auto r = verify_tree_inequality(ref, point_mass<Rational>(s31, 1), two, 1);
  CHECK(r.pass);
  CHECK(to_double(r.lhs) <= r.rhs);
  CHECK(r.factor == doctest::Approx(std::exp(1.0) * 2 * 4 * 1));

  Rng rng(3);
  const auto s42 = enumerate_concepts(4, 2);
  for (int rep = 0; rep < 5; ++rep) {
    const std::vector<int> three{0, 1, 3};
    CHECK(verify_tree_inequality(random_prior(s42, rng), random_prior(s42, rng), three, 2).pass);
  }
}

TEST_CASE("square-root bound") {
  const auto u2 = DataDistribution::uniform(2);
  const auto s21 = enumerate_concepts(2, 1);
  const auto ref = reference_prior<Rational>(s21);
  const auto same = verify_sqrt_bound(ref, ref, u2, 1);
  CHECK(same.pass);
  CHECK(same.outcome_tv == 0);
  const auto r = verify_sqrt_bound(ref, point_mass<Rational>(s21, 0), u2, 1);
  CHECK(r.pass);
  // Exact lhs for y = +1: E_X |P_A(+1 | X) - 0| = (1/2)(1/4) + (1/2)(1/4).
  CHECK(r.lhs[1] == Rational(1, 4));

  const auto s32 = enumerate_concepts(3, 2);
  const auto u3 = DataDistribution::uniform(3);
  const auto plus = smooth_prior<Rational>(SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b111), s32);
  const auto minus = smooth_prior<Rational>(SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b000), s32);
  CHECK(verify_sqrt_bound(plus, minus, u3, 2).pass);
}

TEST_CASE("lemma chain") {
  const auto u2 = DataDistribution::uniform(2);
  const auto s21 = enumerate_concepts(2, 1);
  const auto ref = reference_prior<Rational>(s21);
  const auto same = verify_lemma_chain(ref, ref, u2, 3);
  CHECK(same.pass());
  for (const auto& v : same.outcome_tv) CHECK(v == 0);

  const auto r = verify_lemma_chain(ref, point_mass<Rational>(s21, 0), u2, 3);
  CHECK(r.pass());
  CHECK(r.prior_tv == Rational(1, 2));
  for (std::size_t k = 1; k < r.outcome_tv.size(); ++k) CHECK(r.outcome_tv[k - 1] <= r.outcome_tv[k]);
  CHECK(r.outcome_tv.back() <= Rational(1, 2));
  // k = 1: labels differ only when the drawn point is positive under pi_0.
  CHECK(r.outcome_tv[0] == Rational(1, 4));

  const auto s32 = enumerate_concepts(3, 2);
  const auto u3 = DataDistribution::uniform(3);
  const auto a = smooth_prior<Rational>(SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b101), s32);
  const auto b = smooth_prior<Rational>(SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b100), s32);
  const auto chain = verify_lemma_chain(a, b, u3, 3);
  CHECK(chain.pass());
  CHECK(chain.outcome_tv.back() <= tv(a, b));
}

TEST_CASE("empirical outcome law converges at the root-T scale") {
  const auto space = enumerate_concepts(3, 2);
  const auto prior = reference_prior<double>(space);
  const auto dist = DataDistribution::uniform(3);
  const auto exact = exact_outcome_dist(prior, dist, 2);
  auto mean_tv = [&](int T) {
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      sum += tv(EmpiricalOutcomeDistribution::from_batch(sample_batch(prior, dist, T, 2, s)), exact);
    }
    return sum / 20.0;
  };
  const double small = mean_tv(400);
  const double large = mean_tv(40000);
  const double slope = std::log(large / small) / std::log(100.0);
  CHECK(slope < -0.4);
  CHECK(slope > -0.6);
}

TEST_CASE("pattern counts obey the Sauer bound") {
  const auto space = enumerate_concepts(4, 2);
  Rng rng(4);
  for (int k = 1; k <= 8; ++k) {
    std::vector<int> anchors(static_cast<std::size_t>(k));
    for (auto& x : anchors) x = static_cast<int>(rng.below(4));
    const auto s = sauer_check(*space, anchors);
    // Distinct anchors u: the class realizes every labeling with at most 2 positives.
    const int u = oracle::bits(anchor_mask(anchors));
    std::size_t expected = 0;
    for (int q = 0; q <= std::min(u, 2); ++q) expected += oracle::choose(u, q);
    CHECK(s.patterns == expected);
    CHECK(s.pass);
    CHECK(static_cast<double>(s.patterns) <= std::pow(std::exp(1.0) * k, 2));
  }
}
