#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "priorest/coin_bound.hpp"
#include "priorest/estimators.hpp"

using namespace priorest;

namespace {

CoverFamily family_of(std::vector<TabularPrior<double>> members) {
  CoverFamily f;
  for (std::size_t i = 0; i < members.size(); ++i) f.labels.push_back("p" + std::to_string(i));
  f.members = std::move(members);
  return f;
}

}  // namespace

TEST_CASE("singleton cover always selects member 0") {
  const auto space = enumerate_concepts(3, 2);
  const auto dist = DataDistribution::uniform(3);
  const auto cover = family_of({reference_prior<double>(space)});
  const auto est = SkeletonEstimator::for_outcomes(cover, dist, 2);
  const auto batch = sample_batch(point_mass<double>(space, 4), dist, 30, 2, 1);
  CHECK(skeleton_estimate(batch, est).selected == 0);
  std::vector<Concept> seen{(*space)[3], (*space)[5]};
  CHECK(direct_estimate(seen, cover) == 0);
  CHECK_THROWS_AS(direct_estimate(std::vector<Concept>{}, cover), ValidationError);
}

TEST_CASE("maximally separated point masses") {
  // Concepts {} and {1} on m = 1 disagree everywhere, so rho = 1.
  const auto space = enumerate_concepts(1, 1);
  const auto dist = DataDistribution::uniform(1);
  CHECK(rho((*space)[0], (*space)[1], dist) == 1.0);
  const auto cover = family_of({point_mass<double>(space, 0), point_mass<double>(space, 1)});
  const auto est = SkeletonEstimator::for_outcomes(cover, dist, 1);
  int hits = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    hits += skeleton_estimate(sample_batch(cover.members[0], dist, 50, 1, s), est).selected == 0 ? 1 : 0;
  }
  CHECK(hits >= 198);
}

TEST_CASE("Yatracos sets are consistent with the member tables") {
  const auto space = enumerate_concepts(3, 2);
  const auto cover = theorem2_family(space, 1.0, 1.0);
  const auto est = SkeletonEstimator::for_outcomes(cover, DataDistribution::uniform(3), 2);
  CHECK(est.pairs() == 8 * 7);
  for (int p = 0; p < est.pairs(); ++p) {
    const auto [i, j] = est.pair(p);
    for (std::uint64_t key : est.support_keys()) {
      CHECK(est.in_yatracos(p, key) == est.recompute_membership(p, key));
      // Independent membership test from the keyed tables.
      auto mass = [&](int l) {
        const auto& law = est.member(l);
        const auto it = std::lower_bound(law.keys.begin(), law.keys.end(), key);
        return it != law.keys.end() && *it == key ? law.prob[it - law.keys.begin()] : 0.0;
      };
      CHECK(est.in_yatracos(p, key) == (mass(i) > mass(j)));
    }
  }
}

TEST_CASE("skeleton on the parity family: decomposition and accuracy at T = 10^4") {
  const auto space = enumerate_concepts(3, 2);
  const auto dist = DataDistribution::uniform(3);
  const auto cover = theorem2_family(space, 1.0, 1.0);
  const auto est = SkeletonEstimator::for_outcomes(cover, dist, 2);
  for (int truth = 0; truth < cover.size(); ++truth) {
    const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, static_cast<std::uint64_t>(truth));
    const auto batch = sample_batch(params, space, dist, 10000, 2, 100 + static_cast<std::uint64_t>(truth));
    const auto result = skeleton_estimate(batch, est);
    const auto dec = check_decomposition(est, result, truth);
    CHECK(dec.pass);
    CHECK(dec.min_tv == 0.0);
    // Exact outcome tv of the pick, recomputed outside the estimator.
    const double exact = tv(exact_outcome_dist(cover.members[static_cast<std::size_t>(result.selected)], dist, 2),
                            exact_outcome_dist(cover.members[static_cast<std::size_t>(truth)], dist, 2));
    CHECK(exact == doctest::Approx(dec.lhs).epsilon(1e-12));
    CHECK(exact <= 2.0 * dec.max_dev + 1e-12);
  }
}

TEST_CASE("direct access recovers a point-mass truth and beats the k = d skeleton") {
  const auto space = enumerate_concepts(3, 2);
  const auto dist = DataDistribution::uniform(3);
  const auto pm_cover = family_of({point_mass<double>(space, 0), point_mass<double>(space, 4),
                                   reference_prior<double>(space)});
  std::vector<Concept> obs(5000, (*space)[4]);
  CHECK(direct_estimate(obs, pm_cover) == 1);

  const auto cover = theorem2_family(space, 1.0, 1.0);
  const auto outcome_est = SkeletonEstimator::for_outcomes(cover, dist, 2);
  const auto concept_est = SkeletonEstimator::for_concepts(cover);
  const int reps = 200;
  std::vector<double> gap;
  for (int r = 0; r < reps; ++r) {
    const int truth = r % cover.size();
    const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, static_cast<std::uint64_t>(truth));
    const auto batch = sample_batch(params, space, dist, 1000, 2, 500 + static_cast<std::uint64_t>(r));
    std::vector<Concept> concepts;
    for (const auto& task : batch.tasks) concepts.push_back(task.target);
    const int direct = direct_estimate(concepts, concept_est);
    const int skel = skeleton_estimate(batch, outcome_est).selected;
    const auto& t = cover.members[static_cast<std::size_t>(truth)];
    gap.push_back(tv(cover.members[static_cast<std::size_t>(direct)], t) -
                  tv(cover.members[static_cast<std::size_t>(skel)], t));
  }
  double mean = 0.0, sq = 0.0;
  for (double g : gap) mean += g;
  mean /= reps;
  for (double g : gap) sq += (g - mean) * (g - mean);
  const double se = std::sqrt(sq / (reps - 1) / reps);
  CHECK(mean + 1.645 * se < 0.0);
}

TEST_CASE("sign reduction") {
  const auto space = enumerate_concepts(3, 2);
  for (std::uint64_t theta = 0; theta < 8; ++theta) {
    const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, theta);
    const auto est = reduce_to_signs(smooth_prior<Rational>(params, space), params);
    CHECK(est.threshold == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(est.b_hat == params.b);
    CHECK(reduction_error(est, params) == 0.0);
    for (double p : est.p_hat) {
      CHECK((p == (1.0 + params.gamma_m) / 2.0 || p == (1.0 - params.gamma_m) / 2.0));
    }
  }
  // pi_0 sits exactly on the threshold; d = 2 is even so the else branch is +1.
  const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0);
  const auto at_ref = reduce_to_signs(reference_prior<Rational>(space), params);
  CHECK(at_ref.b_hat == std::vector<int>{1, 1, 1});
  // Odd d flips the branch signs.
  const auto s31 = enumerate_concepts(3, 1);
  const auto p31 = SmoothPriorParams::from_index(3, 1, 1.0, 1.0, 0);
  CHECK(reduce_to_signs(reference_prior<Rational>(s31), p31).b_hat == std::vector<int>{-1, -1, -1});
  CHECK(reduce_to_signs(smooth_prior<Rational>(SmoothPriorParams::from_index(3, 1, 1.0, 1.0, 0b101), s31), p31).b_hat ==
        std::vector<int>{1, -1, 1});
}

TEST_CASE("reduction error never exceeds the prior distance") {
  const auto space = enumerate_concepts(3, 2);
  const auto dist = DataDistribution::uniform(3);
  const auto cover = theorem2_family(space, 1.0, 1.0);
  const auto est = SkeletonEstimator::for_outcomes(cover, dist, 2);
  for (std::uint64_t r = 0; r < 64; ++r) {
    const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, r % 8);
    const auto batch = sample_batch(params, space, dist, 200, 2, r);
    const auto& pick = cover.members[static_cast<std::size_t>(skeleton_estimate(batch, est).selected)];
    const auto red = reduce_to_signs(pick, params);
    // (1/2) sum_i (2^d C)^{-1} |p_hat - p| by hand.
    double by_hand = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      by_hand += std::abs(red.p_hat[i] - (1.0 + params.gamma_m * params.b[i]) / 2.0) / 12.0;
    }
    by_hand /= 2.0;
    CHECK(reduction_error(red, params) == doctest::Approx(by_hand).epsilon(1e-12));
    CHECK(tv(pick, cover.members[r % 8]) >= by_hand - 1e-12);
  }
}

TEST_CASE("majority rule") {
  CHECK(majority_rule(std::vector<int>{1, 1, 1}, 0.2) == doctest::Approx(0.6));
  CHECK(majority_rule(std::vector<int>{0, 0, 0, 0}, 0.2) == doctest::Approx(0.4));
  CHECK(majority_rule(std::vector<int>{1, 0}, 0.2) == doctest::Approx(0.6));
  CHECK(majority_rule(std::vector<int>{}, 0.2) == doctest::Approx(0.6));
}

TEST_CASE("Bayes error at n = 25, gamma = 0.2") {
  const Rational g(1, 5);
  const double exact = to_double(exact_bayes_error(g, 25));
  CHECK(exact == doctest::Approx(oracle::bayes_error(0.2, 25)).epsilon(1e-12));
  // For odd n the majority vote is the Bayes rule.
  CHECK(majority_error(g, 25) == exact_bayes_error(g, 25));
  CHECK(exact >= std::exp(-128.0 * 0.04 * 25.0 / 3.0) / 32.0);
}
