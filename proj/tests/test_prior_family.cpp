#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "priorest/prior_family.hpp"
#include "priorest/rng.hpp"

#include <sstream>

using namespace priorest;

namespace {

std::vector<int> random_signs(std::size_t n, Rng& rng) {
  std::vector<int> b(n);
  for (auto& s : b) s = rng.bernoulli(0.5) ? 1 : -1;
  return b;
}

}  // namespace

TEST_CASE("reference prior on (3,2) and (2,1)") {
  const auto s32 = enumerate_concepts(3, 2);
  const auto p = reference_prior<Rational>(s32);
  CHECK(p.mass_of(Concept{0}) == Rational(1, 4));
  for (Mask h : {0b001, 0b010, 0b100}) CHECK(p.mass_of(Concept{h}) == Rational(1, 6));
  for (Mask h : {0b011, 0b101, 0b110}) CHECK(p.mass_of(Concept{h}) == Rational(1, 12));

  const auto p21 = reference_prior<Rational>(enumerate_concepts(2, 1));
  CHECK(p21.mass_of(Concept{0}) == Rational(1, 2));
  CHECK(p21.mass_of(Concept{1}) == Rational(1, 4));
  CHECK(p21.mass_of(Concept{2}) == Rational(1, 4));
}

TEST_CASE("reference prior is the parity family with gamma = 0") {
  // With gamma = 0 the sampling story reduces to pi_0, so it serves as the oracle.
  for (int m = 1; m <= 6; ++m) {
    for (int d = 1; d <= std::min(m, 3); ++d) {
      const auto space = enumerate_concepts(m, d);
      const auto p = reference_prior<Rational>(space);
      const auto law = oracle::parity_family_law(m, d, Rational(0), std::vector<int>(oracle::choose(m, d), 1));
      Rational total = 0;
      for (int i = 0; i < space->size(); ++i) {
        CHECK(p[i] == law.at((*space)[i].positives));
        total += p[i];
      }
      CHECK(total == 1);
    }
  }
}

TEST_CASE("smooth prior matches its sampling story exactly") {
  Rng rng(7);
  for (auto [m, d] : std::vector<std::pair<int, int>>{{3, 2}, {4, 2}, {5, 3}, {4, 1}}) {
    const auto space = enumerate_concepts(m, d);
    for (int rep = 0; rep < 4; ++rep) {
      const auto params = SmoothPriorParams::make(m, d, 1.0, 1.0, random_signs(oracle::choose(m, d), rng));
      const auto prior = smooth_prior<Rational>(params, space);
      const auto law = oracle::parity_family_law(m, d, Rational(params.gamma_m), params.b);
      for (int i = 0; i < space->size(); ++i) {
        const auto it = law.find((*space)[i].positives);
        CHECK(prior[i] == (it == law.end() ? Rational(0) : it->second));
      }
    }
  }
}

TEST_CASE("all-plus signs give density 1 +- gamma by parity") {
  for (auto [m, d] : std::vector<std::pair<int, int>>{{3, 2}, {5, 2}, {6, 3}}) {
    const auto space = enumerate_concepts(m, d);
    const auto params = SmoothPriorParams::make(m, d, 1.0, 0.5, std::vector<int>(oracle::choose(m, d), 1));
    const Rational g(params.gamma_m);
    const auto prior = smooth_prior<Rational>(params, space);
    const auto ref = reference_prior<Rational>(space);
    for (int i = 0; i < space->size(); ++i) {
      CHECK(density(prior, ref, i) == ((*space)[i].size() % 2 == 1 ? 1 + g : 1 - g));
    }
  }
}

TEST_CASE("smooth prior tends to the reference as L shrinks") {
  const auto space = enumerate_concepts(3, 2);
  const auto params = SmoothPriorParams::make(3, 2, 1e-9, 1.0, {1, -1, 1});
  CHECK(tv(smooth_prior<double>(params, space), reference_prior<double>(space)) <= params.gamma_m);
}

TEST_CASE("random sign vectors normalize and stay in the density band") {
  Rng rng(11);
  const auto space = enumerate_concepts(3, 2);
  const auto ref = reference_prior<double>(space);
  for (int rep = 0; rep < 20; ++rep) {
    const auto params = SmoothPriorParams::make(3, 2, 1.0, 1.0, random_signs(3, rng));
    const auto prior = smooth_prior<double>(params, space);
    CHECK(std::abs(prior.mass().sum() - 1.0) <= 1e-12);
    for (int i = 0; i < space->size(); ++i) {
      const double f = density(prior, ref, i);
      CHECK(f >= 1.0 - params.gamma_m - 1e-12);
      CHECK(f <= 1.0 + params.gamma_m + 1e-12);
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(SmoothPriorParams::make(2, 1, 2.0, 1.0, {1, 1}), ValidationError);  // gamma = 1/2
  CHECK_THROWS_AS(SmoothPriorParams::make(3, 2, 1.0, 1.0, {1, 1}), ValidationError);
  CHECK_THROWS_AS(SmoothPriorParams::make(3, 2, 1.0, 1.0, {1, 0, 1}), ValidationError);
  CHECK_THROWS_AS(SmoothPriorParams::make(3, 2, 1.0, 1.5, {1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(SmoothPriorParams::make(3, 2, -1.0, 1.0, {1, 1, 1}), ValidationError);
  const auto p = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b101);
  CHECK(p.b == std::vector<int>{1, -1, 1});
  CHECK(p.index() == 0b101);
  CHECK(p.gamma_m == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("density examples") {
  const auto space = enumerate_concepts(3, 1);
  const auto ref = reference_prior<Rational>(space);
  for (int i = 0; i < space->size(); ++i) CHECK(density(ref, ref, i) == 1);
  const auto uni = uniform_prior<Rational>(space);
  const auto pm = point_mass<Rational>(space, 2);
  CHECK(density(pm, uni, 2) == space->size());
  CHECK(density(pm, uni, 0) == 0);

  Vector<Rational> mass(4);
  mass << 1, 0, 0, 0;
  const TabularPrior<Rational> zero_ref(space, mass);
  CHECK(density(pm, zero_ref, 1) == 0);
  CHECK_THROWS_AS(density(pm, zero_ref, 2), ValidationError);
}

TEST_CASE("Holder check") {
  const auto u = DataDistribution::uniform(3);
  const auto space = enumerate_concepts(3, 2);
  const auto ref = reference_prior<double>(space);
  for (std::uint64_t theta = 0; theta < 8; ++theta) {
    for (double alpha : {0.5, 1.0}) {
      const auto params = SmoothPriorParams::from_index(3, 2, 1.0, alpha, theta);
      CHECK(holder_check(smooth_prior<double>(params, space), ref, 1.0, alpha, u).pass);
    }
  }
  CHECK(holder_check(ref, ref, 0.01, 1.0, u).pass);

  // Exhaustive scan of |f(h) - f(g)| - L rho as the oracle.
  const auto s41 = enumerate_concepts(4, 1);
  const auto u4 = DataDistribution::uniform(4);
  const auto pm = point_mass<double>(s41, 1);
  const auto uni = uniform_prior<double>(s41);
  const auto report = holder_check(pm, uni, 0.01, 1.0, u4);
  CHECK_FALSE(report.pass);
  REQUIRE(report.worst_h >= 0);
  const double fh = density(pm, uni, report.worst_h);
  const double fg = density(pm, uni, report.worst_g);
  const double r = rho((*s41)[report.worst_h], (*s41)[report.worst_g], u4);
  CHECK(std::abs(fh - fg) > 0.01 * r);
  double worst = 0.0;
  for (int i = 0; i < s41->size(); ++i) {
    for (int j = i + 1; j < s41->size(); ++j) {
      worst = std::max(worst, std::abs(density(pm, uni, i) - density(pm, uni, j)) / rho((*s41)[i], (*s41)[j], u4));
    }
  }
  CHECK(report.worst_ratio == doctest::Approx(worst));
}

TEST_CASE("smooth projection") {
  const auto space = enumerate_concepts(3, 2);
  const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b110);
  const auto prior = smooth_prior<Rational>(params, space);

  const auto full = smooth_projection(prior, {0, 1, 2});
  for (int i = 0; i < space->size(); ++i) CHECK(full.smoothed[i] == prior[i]);

  CHECK_THROWS_AS(smooth_projection(prior, {}), ValidationError);

  const auto one = smooth_projection(prior, {0});
  CHECK(one.cells() == 2);
  Rational with(0), without(0), s_with(0), s_without(0);
  for (int i = 0; i < space->size(); ++i) {
    const bool pos = ((*space)[i].positives & 1U) != 0;
    (pos ? with : without) += prior[i];
    (pos ? s_with : s_without) += one.smoothed[i];
  }
  CHECK(s_with == with);
  CHECK(s_without == without);
  // Within a cell the smoothed table is proportional to pi_0.
  const auto ref = reference_prior<Rational>(space);
  for (int i = 0; i < space->size(); ++i) {
    for (int j = 0; j < space->size(); ++j) {
      if (one.cell_of[static_cast<std::size_t>(i)] == one.cell_of[static_cast<std::size_t>(j)]) {
        CHECK(one.smoothed[i] * ref[j] == one.smoothed[j] * ref[i]);
      }
    }
  }
}

TEST_CASE("anchor count and the small-diameter event") {
  CHECK(anchor_count(2, 0.1) == static_cast<int>(std::ceil(4.0 * 20.0 * std::log(10.0))));
  CHECK(anchor_count(1, 0.5, 1.0) == static_cast<int>(std::ceil(2.0 * std::log(2.0))));
  const auto space = enumerate_concepts(3, 2);
  const auto dist = DataDistribution::uniform(3);
  const auto params = SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b011);
  const auto prior = smooth_prior<double>(params, space);
  const auto report = diameter_check(prior, dist, 1.0, 1.0, params.gamma_m, anchor_count(2, params.gamma_m), 200, 3);
  CHECK(report.pass);
  CHECK(report.frequency > 1.0 - params.gamma_m);
  CHECK(report.max_density_gap < report.gap_bound);
}

TEST_CASE("covers") {
  const auto space = enumerate_concepts(3, 2);
  const auto t2 = theorem2_family(space, 1.0, 1.0);
  CHECK(t2.size() == 8);
  for (int i = 0; i < t2.size(); ++i) {
    for (int j = i + 1; j < t2.size(); ++j) CHECK(tv(t2.members[i], t2.members[j]) > 0.0);
  }

  const auto ref = reference_prior<double>(space);
  const auto pb = t2.members[5];
  const double dist = tv(ref, pb);
  const auto net = net_cover({ref, pb}, dist);
  CHECK(net.size() <= 2);
  CHECK(net_cover({ref, pb}, dist / 2).size() == 2);

  const auto s21 = enumerate_concepts(2, 1);
  int previous = 0;
  for (double eps : {0.5, 0.25, 0.125}) {
    const auto cover = cover_priors(s21, 1.0, 1.0, eps);
    CHECK(cover.size() >= previous);
    previous = cover.size();
    // Every parity-family member is smooth, so it must sit near the cover.
    for (const auto& member : theorem2_family(s21, 1.0, 1.0).members) {
      double best = 1.0;
      for (const auto& c : cover.members) best = std::min(best, tv(member, c));
      CHECK(best <= eps);
    }
  }
  CHECK_THROWS_AS(cover_priors(enumerate_concepts(6, 2), 1.0, 1.0, 0.01, 10), BudgetError);
}

TEST_CASE("prior tables round-trip") {
  const auto space = enumerate_concepts(3, 2);
  const auto prior = smooth_prior<Rational>(SmoothPriorParams::from_index(3, 2, 1.0, 1.0, 0b010), space);
  std::stringstream buf;
  write_prior(buf, prior);
  const auto back = read_prior<Rational>(buf, space);
  for (int i = 0; i < space->size(); ++i) CHECK(back[i] == prior[i]);

  std::stringstream bad("1\t0.5\n1\t0.5\n");
  CHECK_THROWS_AS(read_prior<double>(bad, space), ValidationError);
  std::stringstream outside("7\t1\n");
  CHECK_THROWS_AS(read_prior<double>(outside, space), ValidationError);
}
