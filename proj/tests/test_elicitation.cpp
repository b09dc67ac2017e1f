#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "priorest/elicitation.hpp"

#include <set>
#include <sstream>

using namespace priorest;

namespace {

Menu free_menu(int n) {
  Menu m;
  m.n = n;
  m.prices = Eigen::VectorXd::Zero(1 << n);
  return m;
}

SatisfactionSet two_item_set(std::initializer_list<std::initializer_list<double>> columns) {
  Eigen::MatrixXd v(4, static_cast<Eigen::Index>(columns.size()));
  Eigen::Index j = 0;
  for (const auto& col : columns) {
    Eigen::Index x = 0;
    for (double value : col) v(x++, j) = value;
    ++j;
  }
  return SatisfactionSet::from_valuations(free_menu(2), v);
}

Oracle oracle_for(const SatisfactionSet& fs, int j, std::vector<int>* log = nullptr) {
  return [&fs, j, log](int x) {
    if (log) log->push_back(x);
    return fs.values(x, j);
  };
}

Eigen::VectorXd weights(std::initializer_list<double> w) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double x : w) out[i++] = x;
  return out;
}

ValuationPriorFamily singleton_family() {
  ValuationPriorFamily fam;
  fam.menu = free_menu(2);
  fam.functions = two_item_set({{0.0, 0.5, 0.1, 0.2}, {0.0, 0.1, 0.6, 0.2}, {0.0, 0.2, 0.2, 0.7}});
  fam.members = {weights({0.5, 0.3, 0.2})};
  fam.d = 1;
  return fam;
}

}  // namespace

TEST_CASE("menus") {
  Menu m = free_menu(3);
  m.prices << 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7;
  std::stringstream buf;
  write_menu(buf, m);
  const Menu back = read_menu(buf, 3);
  CHECK(back.prices.isApprox(m.prices));
  m.prices[2] = -0.1;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 1);
  v(1, 0) = 1.5;
  CHECK_THROWS_AS(SatisfactionSet::from_valuations(free_menu(2), v), ValidationError);
}

TEST_CASE("satisfaction values fold in prices") {
  Menu m = free_menu(1);
  m.prices << 0.0, 0.25;
  Eigen::MatrixXd v(2, 2);
  v << 0.0, 0.0, 0.5, 0.25;
  const auto fs = SatisfactionSet::from_valuations(m, v);
  CHECK(fs.values(1, 0) == doctest::Approx(0.25));
  CHECK(fs.values(1, 1) == doctest::Approx(0.0));
  CHECK(fs.best[0] == doctest::Approx(0.25));
  CHECK(fs.best[1] == doctest::Approx(0.0));
  CHECK(fs.canonical[0][1] == 0);
  CHECK(fs.canonical[1][1] == 1);
}

TEST_CASE("point-mass prior needs no queries") {
  const auto fs = two_item_set({{0.0, 0.2, 0.9, 0.1}, {0.0, 0.8, 0.1, 0.1}});
  std::vector<int> log;
  const auto r = method_A(weights({1.0, 0.0}), 0.05, fs, oracle_for(fs, 0, &log));
  CHECK(r.queried.empty());
  CHECK(log.empty());
  CHECK(r.chosen == 2);
}

TEST_CASE("two functions split by one bundle need at most one query") {
  const auto fs = two_item_set({{0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.0}});
  // Simulate the strategy against every customer in the support.
  for (int j = 0; j < 2; ++j) {
    std::vector<int> log;
    const auto r = method_A(weights({0.5, 0.5}), 0.1, fs, oracle_for(fs, j, &log));
    CHECK(r.queried.size() <= 1);
    CHECK(log == r.queried);
    CHECK(fs.values(r.chosen, j) == fs.best[j]);
  }
}

TEST_CASE("identical argmax needs no queries") {
  const auto fs = two_item_set({{0.0, 0.9, 0.1, 0.0}, {0.0, 0.9, 0.3, 0.2}, {-0.5, 0.8, 0.0, 0.1}});
  const auto r = method_A(weights({1.0 / 3, 1.0 / 3, 1.0 / 3}), 0.01, fs, oracle_for(fs, 2));
  CHECK(r.queried.empty());
  CHECK(r.chosen == 1);
}

TEST_CASE("exhaustive strategy") {
  const auto fs = two_item_set({{0.0, 0.3, 0.7, 0.1}});
  const auto r = method_A_prime(0.0, 2, oracle_for(fs, 0));
  CHECK(r.queried.size() == 4);
  CHECK(r.chosen == 2);
  int calls = 0;
  const auto big = method_A_prime(0.1, 8, [&](int x) {
    ++calls;
    return x == 77 ? 1.0 : 0.0;
  });
  CHECK(big.queried.size() == 256);
  CHECK(calls == 256);
  CHECK(big.chosen == 77);
  CHECK_THROWS_AS(method_A_prime(-1.0, 2, oracle_for(fs, 0)), ValidationError);
}

TEST_CASE("chain family") {
  const auto fam = make_chain_family({});
  CHECK(fam.size() == 16);
  CHECK(fam.functions.functions() == 32);
  CHECK(fam.functions.bundles() == 256);
  CHECK(fam.d == 1);
  CHECK(pseudo_dimension(fam.functions, 3) == 1);
  for (const auto& w : fam.members) CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("method A meets its regret contract and never repeats a query") {
  const auto fam = make_chain_family({});
  for (double eps : {0.02, 0.05, 0.2}) {
    const MethodCache cache(fam, eps, 4);
    for (int l = 0; l < fam.size(); ++l) {
      double regret = 0.0;
      for (int j = 0; j < fam.functions.functions(); ++j) {
        const auto& r = cache.result(l, j);
        std::set<int> unique(r.queried.begin(), r.queried.end());
        CHECK(unique.size() == r.queried.size());
        regret += fam.members[static_cast<std::size_t>(l)][j] * (fam.functions.best[j] - fam.functions.values(r.chosen, j));
      }
      CHECK(regret <= eps + 1e-12);
    }
  }
}

TEST_CASE("expected queries fall as epsilon grows") {
  const auto fam = make_chain_family({});
  std::vector<double> previous(static_cast<std::size_t>(fam.size()), 1e9);
  for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const MethodCache cache(fam, eps, 4);
    for (int l = 0; l < fam.size(); ++l) {
      const double q = cache.expected_queries(l);
      CHECK(q <= previous[static_cast<std::size_t>(l)] + 1e-12);
      previous[static_cast<std::size_t>(l)] = q;
    }
  }
}

TEST_CASE("Monte Carlo Q") {
  ValuationPriorFamily fam;
  fam.menu = free_menu(2);
  fam.functions = two_item_set({{0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.0}});
  fam.members = {weights({1.0, 0.0}), weights({0.5, 0.5})};
  const MethodCache cache(fam, 0.1);
  CHECK(estimate_Q(cache, 0, 1000, 1).mean == 0.0);
  const auto q = estimate_Q(cache, 1, 1000, 1);
  CHECK(q.mean <= 1.0);
  CHECK(q.mean > 0.0);
  CHECK(cache.expected_queries(1) == 1.0);
  CHECK_THROWS_AS(estimate_Q(cache, 1, 0, 1), ValidationError);
}

TEST_CASE("calibration") {
  const auto single = singleton_family();
  const auto s = calibrate_schedule(single, 0.1, {0, 10, 100}, 20, 1);
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(s.R[g] == 0.0);
    CHECK(s.delta[g] == 0.0);
  }
  CHECK(s.R_at(-1) == std::numeric_limits<double>::infinity());

  ChainFamilySpec spec;
  spec.members = 2;
  const auto pair = make_chain_family(spec);
  CHECK(pair.tv(0, 1) > 0.9);
  const std::vector<long> grid{1, 5, 25, 100, 400};
  const auto two = calibrate_schedule(pair, 0.1, grid, 100, 2);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(two.delta[g] <= 0.1);
    if (g > 0) CHECK(two.R[g] <= two.R[g - 1]);
  }
  CHECK(two.R.back() < two.R.front());
  CHECK(two.method == "nearest-rank");

  CHECK_THROWS_AS(calibrate_schedule(pair, 0.1, grid, 4, 2), ValidationError);
  CHECK_THROWS_AS(calibrate_schedule(pair, 0.1, {10, 5}, 100, 2), ValidationError);
}

TEST_CASE("singleton family runs the A branch from the first customer") {
  const auto fam = singleton_family();
  const double eps = 0.2;
  const auto schedule = calibrate_schedule(fam, eps / 2, {0, 10}, 20, 1);
  const MethodCache cache(fam, eps / 4);
  const auto est = elicitation_estimator(fam);
  const auto rows = run_algorithm1(fam, est, schedule, cache, 0, eps, 300, 5);
  double regret = 0.0, queries = 0.0;
  for (const auto& r : rows) {
    CHECK(r.a_branch);
    CHECK(r.duplicates == 0);
    regret += r.regret;
    queries += r.queries;
  }
  CHECK(regret / 300.0 <= eps);
  CHECK(queries / 300.0 <= cache.expected_queries(0) + fam.d + 0.5);
}

TEST_CASE("two separated members keep regret below epsilon") {
  ChainFamilySpec spec;
  spec.members = 2;
  const auto fam = make_chain_family(spec);
  const double eps = 0.2;
  const auto schedule = calibrate_schedule(fam, eps / 2, {0, 10, 25, 50, 100, 200, 500}, 100, 3, 1.25, 4);
  const MethodCache cache(fam, eps / 4, 4);
  const auto est = elicitation_estimator(fam);
  std::vector<double> regrets;
  for (int s = 0; s < 8; ++s) {
    for (const auto& r : run_algorithm1(fam, est, schedule, cache, s % 2, eps, 500, 100 + static_cast<std::uint64_t>(s))) {
      regrets.push_back(r.regret);
      CHECK(r.duplicates == 0);
    }
  }
  double mean = 0.0, sq = 0.0;
  for (double r : regrets) mean += r;
  mean /= static_cast<double>(regrets.size());
  for (double r : regrets) sq += (r - mean) * (r - mean);
  const double se = std::sqrt(sq / static_cast<double>(regrets.size() - 1) / static_cast<double>(regrets.size()));
  CHECK(mean + 1.645 * se <= eps);
}

TEST_CASE("the cache must match epsilon / 4") {
  const auto fam = singleton_family();
  const auto schedule = calibrate_schedule(fam, 0.1, {0}, 20, 1);
  const MethodCache cache(fam, 0.1);
  CHECK_THROWS_AS(run_algorithm1(fam, elicitation_estimator(fam), schedule, cache, 0, 0.2, 10, 1), ValidationError);
}
