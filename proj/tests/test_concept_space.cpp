#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "priorest/concept_space.hpp"

#include <set>

using namespace priorest;

namespace {

Concept set_of(std::initializer_list<int> points) {
  Concept c;
  for (int p : points) c.positives |= Mask{1} << (p - 1);
  return c;
}

// Shattering by listing every labeling a class realizes on a subset.
bool shatters(const ConceptSpace& space, Mask subset) {
  std::set<Mask> seen;
  for (const auto& c : space.concepts()) seen.insert(c.positives & subset);
  return seen.size() == (std::size_t{1} << oracle::bits(subset));
}

}  // namespace

TEST_CASE("concept counts match the binomial sum") {
  for (int m = 1; m <= 8; ++m) {
    for (int d = 1; d <= m; ++d) {
      std::uint64_t expected = 0;
      for (int q = 0; q <= d; ++q) expected += oracle::choose(m, q);
      CHECK(enumerate_concepts(m, d)->size() == static_cast<int>(expected));
    }
  }
  CHECK(enumerate_concepts(3, 2)->size() == 7);
  CHECK(enumerate_concepts(1, 1)->size() == 2);
  CHECK(enumerate_concepts(5, 2)->size() == 16);
}

TEST_CASE("enumeration is by size then mask, without duplicates") {
  const auto space = enumerate_concepts(3, 2);
  const std::vector<Mask> expected{0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110};
  REQUIRE(space->size() == 7);
  for (int i = 0; i < 7; ++i) {
    CHECK((*space)[i].positives == expected[static_cast<std::size_t>(i)]);
    CHECK(space->index_of((*space)[i]) == i);
  }
  CHECK(space->index_of(Concept{0b111}) == -1);
  CHECK(space->d_subsets() == std::vector<Mask>{0b011, 0b101, 0b110});

  const auto big = enumerate_concepts(6, 3);
  std::set<Mask> unique;
  for (const auto& c : big->concepts()) {
    CHECK(c.size() <= 3);
    unique.insert(c.positives);
  }
  CHECK(unique.size() == big->concepts().size());
}

TEST_CASE("enumerate_concepts rejects bad dimensions") {
  CHECK_THROWS_AS(enumerate_concepts(3, 4), ValidationError);
  CHECK_THROWS_AS(enumerate_concepts(3, 0), ValidationError);
  CHECK_THROWS_AS(enumerate_concepts(0, 1), ValidationError);
}

TEST_CASE("rho examples") {
  const auto u4 = DataDistribution::uniform(4);
  CHECK(rho(set_of({1}), set_of({1, 2}), u4) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(rho(set_of({1, 3}), set_of({1, 3}), u4) == 0.0);
  const auto u3 = DataDistribution::uniform(3);
  CHECK(rho(set_of({1}), set_of({2, 3}), u3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(rho(set_of({4}), set_of({1}), u3), ValidationError);
}

TEST_CASE("rho is a metric on C_{m,d} for positive weights") {
  for (int m = 1; m <= 6; ++m) {
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = static_cast<double>(i + 1);
    w /= w.sum();
    for (const auto& dist : {DataDistribution::uniform(m), DataDistribution(w)}) {
      const auto space = enumerate_concepts(m, std::min(m, 3));
      const auto& cs = space->concepts();
      for (const auto& h : cs) {
        CHECK(rho(h, h, dist) == 0.0);
        for (const auto& g : cs) {
          const double hg = rho(h, g, dist);
          CHECK(hg == rho(g, h, dist));
          if (!(h == g)) {
            CHECK(hg > 0.0);
            if (dist.is_uniform()) CHECK(hg >= 1.0 / m - 1e-15);
          }
          for (const auto& f : cs) CHECK(rho(h, f, dist) <= hg + rho(g, f, dist) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("data distribution needs strictly positive weights") {
  Eigen::VectorXd w(3);
  w << 0.5, 0.5, 0.0;
  CHECK_THROWS_AS(DataDistribution{w}, ValidationError);
  w << 0.5, 0.6, 0.1;
  CHECK_THROWS_AS(DataDistribution{w}, ValidationError);
}

TEST_CASE("VC dimension equals d by brute force") {
  CHECK(verify_vc_dimension(*enumerate_concepts(3, 2)));
  CHECK(verify_vc_dimension(*enumerate_concepts(4, 1)));
  CHECK(verify_vc_dimension(*enumerate_concepts(1, 1)));
  for (int m = 1; m <= 6; ++m) {
    for (int d = 1; d <= m; ++d) {
      const auto space = enumerate_concepts(m, d);
      CHECK(verify_vc_dimension(*space));
      bool some_d = false;
      bool some_d1 = false;
      for (Mask s = 0; s < (Mask{1} << m); ++s) {
        if (oracle::bits(s) == d && shatters(*space, s)) some_d = true;
        if (oracle::bits(s) == d + 1 && shatters(*space, s)) some_d1 = true;
      }
      CHECK(some_d);
      CHECK_FALSE(some_d1);
    }
  }
  CHECK_THROWS_AS(verify_vc_dimension(*enumerate_concepts(13, 1)), BudgetError);
}

TEST_CASE("realizable patterns ignore repeated anchors") {
  const auto space = enumerate_concepts(4, 2);
  const std::vector<int> a{0, 1, 2};
  const std::vector<int> b{0, 1, 1, 2, 0};
  CHECK(realizable_patterns(*space, a) == 7);
  CHECK(realizable_patterns(*space, b) == 7);
  const std::vector<int> two{3, 2};
  CHECK(realizable_patterns(*space, two) == 4);
}
