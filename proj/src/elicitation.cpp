#include "priorest/elicitation.hpp"

#include "priorest/parallel.hpp"
#include "priorest/task_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace priorest {

void Menu::validate() const {
  if (n < 1 || n > 16) {
    throw ValidationError("menus need 1 <= n <= 16 items");
  }
  if (prices.size() != bundles()) {
    throw ValidationError("menu must price all 2^n bundles");
  }
  if ((prices.array() < 0.0).any()) {
    throw ValidationError("prices must be nonnegative");
  }
}

void write_menu(std::ostream& out, const Menu& menu) {
  for (int x = 0; x < menu.bundles(); ++x) out << x << '\t' << format_double(menu.prices[x]) << '\n';
}

Menu read_menu(std::istream& in, int n) {
  Menu menu;
  menu.n = n;
  if (n < 1 || n > 16) {
    throw ValidationError("menus need 1 <= n <= 16 items");
  }
  menu.prices = Eigen::VectorXd::Constant(1 << n, -1.0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError("menu line " + std::to_string(lineno) + ": expected mask<TAB>price");
    }
    int x = -1;
    try {
      x = std::stoi(line.substr(0, tab));
    } catch (const std::exception&) {
      throw ValidationError("menu line " + std::to_string(lineno) + ": bad mask");
    }
    if (x < 0 || x >= (1 << n)) {
      throw ValidationError("menu line " + std::to_string(lineno) + ": mask outside the bundle space");
    }
    menu.prices[x] = parse_double(line.substr(tab + 1));
  }
  if ((menu.prices.array() < 0.0).any()) {
    throw ValidationError("menu must give every bundle a nonnegative price");
  }
  return menu;
}

SatisfactionSet SatisfactionSet::from_valuations(const Menu& menu, const Eigen::MatrixXd& valuations) {
  menu.validate();
  if (valuations.rows() != menu.bundles() || valuations.cols() < 1) {
    throw ValidationError("valuation table must have one row per bundle");
  }
  if ((valuations.array().abs() > 1.0).any()) {
    throw ValidationError("valuations must lie in [-1, 1]");
  }
  SatisfactionSet fs;
  fs.n = menu.n;
  fs.values = valuations.colwise() - menu.prices;
  fs.best = fs.values.colwise().maxCoeff().transpose();
  const int F = static_cast<int>(fs.values.cols());
  fs.canonical.assign(static_cast<std::size_t>(fs.bundles()), std::vector<int>(static_cast<std::size_t>(F)));
  for (int x = 0; x < fs.bundles(); ++x) {
    for (int j = 0; j < F; ++j) {
      int c = j;
      for (int i = 0; i < j; ++i) {
        if (fs.values(x, i) == fs.values(x, j)) {
          c = i;
          break;
        }
      }
      fs.canonical[static_cast<std::size_t>(x)][static_cast<std::size_t>(j)] = c;
    }
  }
  return fs;
}

int pseudo_dimension(const SatisfactionSet& fs, int max_k) {
  const int F = fs.functions();
  if (F > 64) {
    throw BudgetError("pseudo-dimension check handles at most 64 functions");
  }
  const Mask full = F == 64 ? ~Mask{0} : (Mask{1} << F) - 1;
  // Every achievable above-threshold set {j : s_j(x) > r}, deduplicated.
  std::set<Mask> masks;
  for (int x = 0; x < fs.bundles(); ++x) {
    std::vector<double> vals;
    for (int j = 0; j < F; ++j) vals.push_back(fs.values(x, j));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (double r : vals) {
      Mask m = 0;
      for (int j = 0; j < F; ++j) {
        if (fs.values(x, j) > r) m |= Mask{1} << j;
      }
      if (m != 0 && m != full) masks.insert(m);
    }
  }
  const std::vector<Mask> list(masks.begin(), masks.end());
  if (list.size() > 4096) {
    throw BudgetError("too many distinct threshold sets for a brute-force pseudo-dimension check");
  }
  int best = list.empty() ? 0 : 1;
  std::vector<std::size_t> pick;
  std::function<bool(std::size_t, int)> search = [&](std::size_t start, int k) -> bool {
    if (static_cast<int>(pick.size()) == k) {
      for (std::uint32_t pattern = 0; pattern < (1U << k); ++pattern) {
        Mask cell = full;
        for (int i = 0; i < k; ++i) {
          const Mask m = list[pick[static_cast<std::size_t>(i)]];
          cell &= (pattern >> i) & 1U ? m : (full & ~m);
        }
        if (cell == 0) return false;
      }
      return true;
    }
    for (std::size_t i = start; i < list.size(); ++i) {
      pick.push_back(i);
      if (search(i + 1, k)) return true;
      pick.pop_back();
    }
    return false;
  };
  for (int k = 2; k <= max_k; ++k) {
    pick.clear();
    if (!search(0, k)) break;
    best = k;
  }
  return best;
}

ValuationPriorFamily make_chain_family(const ChainFamilySpec& spec) {
  if (spec.functions < 2 || spec.functions > 64) {
    throw ValidationError("chain family needs between 2 and 64 functions");
  }
  if (spec.members < 1) {
    throw ValidationError("chain family needs at least one member");
  }
  if (!(spec.width > 0.0)) {
    throw ValidationError("prior window width must be positive");
  }
  ValuationPriorFamily fam;
  fam.menu.n = spec.n;
  if (spec.n < 1 || spec.n > 16) {
    throw ValidationError("menus need 1 <= n <= 16 items");
  }
  const int B = 1 << spec.n;
  Rng rng(spec.seed, 0, Purpose::menu);
  fam.menu.prices.resize(B);
  Eigen::VectorXd base(B);
  Eigen::VectorXd lift(B);
  for (int x = 0; x < B; ++x) {
    const int items = std::popcount(static_cast<unsigned>(x));
    fam.menu.prices[x] = 0.05 * items;
    base[x] = x == 0 ? 0.0 : -rng.uniform();
    lift[x] = (x != 0 && rng.uniform() < 0.25) ? 2.0 * rng.uniform() : 0.0;
  }
  Eigen::MatrixXd val(B, spec.functions);
  for (int j = 0; j < spec.functions; ++j) {
    const double a = static_cast<double>(j) / (spec.functions - 1);
    val.col(j) = (base + a * lift).cwiseMax(-1.0).cwiseMin(1.0);
  }
  fam.functions = SatisfactionSet::from_valuations(fam.menu, val);
  fam.d = pseudo_dimension(fam.functions);
  if (fam.d < 1) {
    throw ValidationError("valuation class is constant; nothing to elicit");
  }
  for (int t = 0; t < spec.members; ++t) {
    const double centre = spec.members == 1 ? (spec.functions - 1) / 2.0
                                            : t * (spec.functions - 1.0) / (spec.members - 1);
    Eigen::VectorXd w(spec.functions);
    for (int j = 0; j < spec.functions; ++j) {
      const double z = (j - centre) / spec.width;
      w[j] = std::exp(-0.5 * z * z);
    }
    fam.members.push_back(w / w.sum());
  }
  return fam;
}

namespace {

// Expected regret of the posterior-optimal bundle, unnormalized: returns
// sum_j w_j best_j - max_x (V w)_x, and the maximizer.
double raw_regret(const SatisfactionSet& fs, const Eigen::VectorXd& w, int* argmax) {
  const Eigen::VectorXd expected = fs.values * w;
  Eigen::Index x = 0;
  const double top = expected.maxCoeff(&x);
  if (argmax) *argmax = static_cast<int>(x);
  return w.dot(fs.best) - top;
}

}  // namespace

MethodResult method_A(const Eigen::VectorXd& prior, double epsilon, const SatisfactionSet& fs, const Oracle& oracle) {
  if (!(epsilon > 0.0)) {
    throw ValidationError("method A needs epsilon > 0");
  }
  const int F = fs.functions();
  const int B = fs.bundles();
  if (prior.size() != F) {
    throw ValidationError("prior does not match the function set");
  }
  Eigen::VectorXd w = prior;
  std::vector<bool> consistent(static_cast<std::size_t>(F), true);
  std::vector<bool> asked(static_cast<std::size_t>(B), false);
  MethodResult out;
  while (true) {
    const double total = w.sum();
    int choice = 0;
    const double regret = raw_regret(fs, w, &choice) / total;
    if (regret <= epsilon) {
      out.chosen = choice;
      return out;
    }
    int best_x = -1;
    double best_drop = 0.0;
    int first_informative = -1;
    for (int x = 0; x < B; ++x) {
      if (asked[static_cast<std::size_t>(x)]) continue;
      // Split the weighted support by the value s_j(x).
      std::map<int, Eigen::VectorXd> groups;
      for (int j = 0; j < F; ++j) {
        if (w[j] <= 0.0) continue;
        const int c = fs.canonical[static_cast<std::size_t>(x)][static_cast<std::size_t>(j)];
        auto it = groups.find(c);
        if (it == groups.end()) it = groups.emplace(c, Eigen::VectorXd::Zero(F)).first;
        it->second[j] = w[j];
      }
      if (groups.size() < 2) continue;
      if (first_informative < 0) first_informative = x;
      double after = 0.0;
      for (const auto& [c, wg] : groups) after += raw_regret(fs, wg, nullptr);
      const double drop = regret - after / total;
      if (drop > best_drop + 1e-15) {
        best_drop = drop;
        best_x = x;
      }
    }
    if (best_x < 0) best_x = first_informative;
    if (best_x < 0) {
      // Support agrees everywhere left to ask; the current choice is final.
      out.chosen = choice;
      return out;
    }
    asked[static_cast<std::size_t>(best_x)] = true;
    out.queried.push_back(best_x);
    const double answer = oracle(best_x);
    bool any = false;
    for (int j = 0; j < F; ++j) {
      if (fs.values(best_x, j) != answer) {
        consistent[static_cast<std::size_t>(j)] = false;
        w[j] = 0.0;
      } else if (w[j] > 0.0) {
        any = true;
      }
    }
    if (!any) {
      // The customer lies outside the prior's support: continue under a
      // uniform law on the functions consistent with every answer so far.
      for (int j = 0; j < F; ++j) w[j] = consistent[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
      if (w.sum() == 0.0) {
        throw ValidationError("oracle answers match no function in the class");
      }
    }
  }
}

MethodResult method_A_prime(double epsilon, int n, const Oracle& oracle) {
  if (epsilon < 0.0) {
    throw ValidationError("method A' needs epsilon >= 0");
  }
  MethodResult out;
  double top = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < (1 << n); ++x) {
    out.queried.push_back(x);
    const double v = oracle(x);
    if (v > top) {
      top = v;
      out.chosen = x;
    }
  }
  return out;
}

MethodCache::MethodCache(const ValuationPriorFamily& family, double epsilon, int workers)
    : family_(&family), epsilon_(epsilon), functions_(family.functions.functions()) {
  const std::size_t total = static_cast<std::size_t>(family.size()) * static_cast<std::size_t>(functions_);
  results_.resize(total);
  parallel_for(total, workers, [&](std::size_t u) {
    const int member = static_cast<int>(u / static_cast<std::size_t>(functions_));
    const int j = static_cast<int>(u % static_cast<std::size_t>(functions_));
    const auto& fs = family.functions;
    results_[u] = method_A(family.members[static_cast<std::size_t>(member)], epsilon, fs,
                           [&](int x) { return fs.values(x, j); });
  });
}

const MethodResult& MethodCache::result(int member, int function) const {
  return results_[static_cast<std::size_t>(member) * static_cast<std::size_t>(functions_) +
                  static_cast<std::size_t>(function)];
}

double MethodCache::expected_queries(int member) const {
  const auto& prior = family_->members[static_cast<std::size_t>(member)];
  double q = 0.0;
  for (int j = 0; j < functions_; ++j) q += prior[j] * static_cast<double>(result(member, j).queried.size());
  return q;
}

QEstimate estimate_Q(const MethodCache& cache, int member, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) {
    throw ValidationError("estimate_Q needs at least one trial");
  }
  const Categorical customers(cache.family().members[static_cast<std::size_t>(member)]);
  Rng rng(seed, static_cast<std::uint64_t>(member), Purpose::customer);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double q = static_cast<double>(cache.result(member, customers(rng)).queried.size());
    sum += q;
    sum_sq += q * q;
  }
  const double n = static_cast<double>(trials);
  QEstimate out;
  out.trials = trials;
  out.mean = sum / n;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0)) : 0.0;
  out.half_width = 1.96 * std::sqrt(var / n);
  return out;
}

std::uint64_t elicitation_key(const SatisfactionSet& fs, int x, int function) {
  return static_cast<std::uint64_t>(x) * static_cast<std::uint64_t>(fs.functions()) +
         static_cast<std::uint64_t>(fs.canonical[static_cast<std::size_t>(x)][static_cast<std::size_t>(function)]);
}

namespace {

// Before any customer every member scores alike, so the tie rule picks 0.
int current_estimate(const SkeletonEstimator& est, const SkeletonEstimator::Accumulator& acc) {
  return acc.total() == 0 ? 0 : est.select(acc).selected;
}

// One customer's d sample points packed base (bundles * functions).
std::uint64_t tuple_key(const SatisfactionSet& fs, std::span<const int> xs, int function) {
  const std::uint64_t radix = static_cast<std::uint64_t>(fs.bundles()) * static_cast<std::uint64_t>(fs.functions());
  std::uint64_t key = 0;
  std::uint64_t scale = 1;
  for (int x : xs) {
    key += scale * elicitation_key(fs, x, function);
    scale *= radix;
  }
  return key;
}

}  // namespace

SkeletonEstimator elicitation_estimator(const ValuationPriorFamily& family) {
  const auto& fs = family.functions;
  const int B = fs.bundles();
  const int F = fs.functions();
  const double tuples = std::pow(static_cast<double>(B), family.d);
  if (tuples * F > static_cast<double>(kOutcomeBudget)) {
    throw BudgetError("elicitation outcome space exceeds the enumeration budget");
  }
  const std::size_t count = static_cast<std::size_t>(tuples);
  std::vector<KeyedLaw> laws;
  for (const auto& prior : family.members) {
    std::map<std::uint64_t, double> table;
    std::vector<int> xs(static_cast<std::size_t>(family.d));
    for (std::size_t u = 0; u < count; ++u) {
      std::size_t r = u;
      for (auto& x : xs) {
        x = static_cast<int>(r % static_cast<std::size_t>(B));
        r /= static_cast<std::size_t>(B);
      }
      for (int j = 0; j < F; ++j) {
        if (prior[j] > 0.0) table[tuple_key(fs, xs, j)] += prior[j] / tuples;
      }
    }
    KeyedLaw law;
    law.prob.resize(static_cast<Eigen::Index>(table.size()));
    Eigen::Index i = 0;
    for (const auto& [key, p] : table) {
      law.keys.push_back(key);
      law.prob[i++] = p;
    }
    laws.push_back(std::move(law));
  }
  return SkeletonEstimator(std::move(laws));
}

double ScheduleRDelta::R_at(long t) const {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < T_grid.size() && T_grid[i] <= t; ++i) r = R[i];
  return r;
}

double ScheduleRDelta::delta_at(long t) const {
  double d = 1.0;
  for (std::size_t i = 0; i < T_grid.size() && T_grid[i] <= t; ++i) d = delta[i];
  return d;
}

namespace {

struct Customer {
  int function = 0;
  std::vector<int> xs;
};

Customer draw_customer(const Categorical& truth, int bundles, int d, std::uint64_t seed, long t) {
  Rng rng(seed, static_cast<std::uint64_t>(t), Purpose::customer);
  Customer c;
  c.function = truth(rng);
  for (int i = 0; i < d; ++i) c.xs.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(bundles))));
  return c;
}

}  // namespace

ScheduleRDelta calibrate_schedule(const ValuationPriorFamily& family, double alpha, const std::vector<long>& T_grid,
                                  int replicates, std::uint64_t seed, double safety, int workers) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("calibration level alpha must lie in (0, 1)");
  }
  if (!(safety >= 1.0)) {
    throw ValidationError("safety factor must be at least 1");
  }
  if (T_grid.empty()) {
    throw ValidationError("calibration grid is empty");
  }
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    if (T_grid[i] < 0 || (i > 0 && T_grid[i] <= T_grid[i - 1])) {
      throw ValidationError("calibration grid must be nonnegative and strictly increasing");
    }
  }
  const int M = family.size();
  const int samples = M * replicates;
  if (replicates < 1 || samples < static_cast<int>(std::ceil(1.0 / alpha))) {
    throw ValidationError("calibration needs at least ceil(1/alpha) = " +
                          std::to_string(static_cast<int>(std::ceil(1.0 / alpha))) +
                          " truth-replicate samples, got " + std::to_string(samples));
  }
  const SkeletonEstimator est = elicitation_estimator(family);
  const std::size_t G = T_grid.size();
  std::vector<std::vector<double>> errors(static_cast<std::size_t>(samples), std::vector<double>(G));
  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t u) {
    const int truth = static_cast<int>(u) / replicates;
    const int rep = static_cast<int>(u) % replicates;
    const Categorical law(family.members[static_cast<std::size_t>(truth)]);
    const std::uint64_t unit_seed = derive_seed({seed, static_cast<std::uint64_t>(truth), static_cast<std::uint64_t>(rep)});
    auto acc = est.accumulator();
    std::size_t g = 0;
    for (long t = 0; g < G; ++t) {
      if (t > 0) {
        const Customer c = draw_customer(law, family.functions.bundles(), family.d, unit_seed, t);
        acc.add(tuple_key(family.functions, c.xs, c.function));
      }
      if (t == T_grid[g]) {
        errors[u][g] = family.tv(current_estimate(est, acc), truth);
        ++g;
      }
    }
  });
  ScheduleRDelta out;
  out.T_grid = T_grid;
  out.alpha = alpha;
  out.safety = safety;
  out.samples_per_T = samples;
  out.R.resize(G);
  out.delta.resize(G);
  out.raw_quantile.resize(G);
  const std::size_t rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * samples));
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> col;
    for (const auto& row : errors) col.push_back(row[g]);
    std::sort(col.begin(), col.end());
    out.raw_quantile[g] = col[std::max<std::size_t>(rank, 1) - 1];
    out.R[g] = safety * out.raw_quantile[g];
  }
  for (std::size_t g = G - 1; g-- > 0;) out.R[g] = std::max(out.R[g], out.R[g + 1]);
  for (std::size_t g = 0; g < G; ++g) {
    long over = 0;
    for (const auto& row : errors) over += row[g] > out.R[g] ? 1 : 0;
    out.delta[g] = static_cast<double>(over) / samples;
  }
  return out;
}

std::vector<LedgerRow> run_algorithm1(const ValuationPriorFamily& family, const SkeletonEstimator& est,
                                      const ScheduleRDelta& schedule, const MethodCache& cache, int truth,
                                      double epsilon, long T, std::uint64_t seed) {
  if (truth < 0 || truth >= family.size()) {
    throw ValidationError("truth is not a family member");
  }
  if (std::abs(cache.epsilon() - epsilon / 4.0) > 1e-12) {
    throw ValidationError("method cache must be built at epsilon/4");
  }
  const auto& fs = family.functions;
  const int M = family.size();
  std::vector<double> Q(static_cast<std::size_t>(M));
  for (int l = 0; l < M; ++l) Q[static_cast<std::size_t>(l)] = cache.expected_queries(l);
  const Categorical law(family.members[static_cast<std::size_t>(truth)]);
  auto acc = est.accumulator();
  std::vector<LedgerRow> ledger;
  ledger.reserve(static_cast<std::size_t>(T));
  for (long t = 1; t <= T; ++t) {
    const Customer c = draw_customer(law, fs.bundles(), family.d, seed, t);
    LedgerRow row;
    row.t = t;
    row.R_used = schedule.R_at(t - 1);
    if (row.R_used > epsilon / 8.0) {
      const MethodResult r = method_A_prime(epsilon, fs.n, [&](int x) { return fs.values(x, c.function); });
      row.queries = static_cast<int>(r.queried.size());
      row.regret = fs.best[c.function] - fs.values(r.chosen, c.function);
    } else {
      row.a_branch = true;
      const int hat = current_estimate(est, acc);
      int check = -1;
      for (int l = 0; l < M; ++l) {
        if (family.tv(l, hat) > row.R_used) continue;
        if (check < 0 || Q[static_cast<std::size_t>(l)] < Q[static_cast<std::size_t>(check)]) check = l;
      }
      if (check < 0) check = hat;
      row.theta_check = check;
      row.exceeded = family.tv(truth, hat) > row.R_used;
      const MethodResult& r = cache.result(check, c.function);
      std::set<int> asked(c.xs.begin(), c.xs.end());
      std::set<int> seen;
      for (int x : r.queried) {
        if (!seen.insert(x).second) ++row.duplicates;
        asked.insert(x);
      }
      row.queries = static_cast<int>(asked.size());
      row.regret = fs.best[c.function] - fs.values(r.chosen, c.function);
    }
    acc.add(tuple_key(fs, c.xs, c.function));
    ledger.push_back(row);
  }
  return ledger;
}

void ElicitationConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ValidationError("epsilon must lie in (0, 1]");
  }
  if (T < 1 || streams < 1) {
    throw ValidationError("T and streams must be at least 1");
  }
  if (tail < 1 || tail > T) {
    throw ValidationError("tail must lie in [1, T]");
  }
  if (calibration_replicates < 1 || q_trials < 1 || workers < 1) {
    throw ValidationError("calibration_replicates, q_trials and workers must be at least 1");
  }
  if (tail_slack < 0.0) {
    throw ValidationError("tail_slack must be nonnegative");
  }
}

ElicitationResult run_elicitation(const ElicitationConfig& cfg) {
  cfg.validate();
  ElicitationResult out;
  out.family = make_chain_family(cfg.family);
  const auto& family = out.family;
  const MethodCache cache(family, cfg.epsilon / 4.0, cfg.workers);
  out.schedule = calibrate_schedule(family, cfg.epsilon / 2.0, cfg.calibration_grid, cfg.calibration_replicates,
                                    derive_seed({cfg.seed, 1}), cfg.safety, cfg.workers);
  const SkeletonEstimator est = elicitation_estimator(family);
  const std::size_t S = static_cast<std::size_t>(cfg.streams);
  out.ledgers.resize(S);
  out.streams.resize(S);
  parallel_for(S, cfg.workers, [&](std::size_t s) {
    const int truth = static_cast<int>(s % static_cast<std::size_t>(family.size()));
    out.ledgers[s] = run_algorithm1(family, est, out.schedule, cache, truth, cfg.epsilon, cfg.T,
                                    derive_seed({cfg.seed, 2, s}));
    StreamSummary& sum = out.streams[s];
    sum.stream = static_cast<int>(s);
    sum.truth = truth;
    double tail = 0.0;
    for (const auto& row : out.ledgers[s]) {
      sum.mean_regret += row.regret;
      if (row.t > cfg.T - cfg.tail) tail += row.queries;
      if (row.a_branch) {
        ++sum.a_branch;
        if (sum.first_a_branch < 0) sum.first_a_branch = row.t;
        sum.exceedances += row.exceeded ? 1 : 0;
      }
      sum.duplicates += row.duplicates;
    }
    sum.mean_regret /= static_cast<double>(cfg.T);
    sum.tail_queries = tail / static_cast<double>(cfg.tail);
    sum.q_truth = estimate_Q(cache, truth, cfg.q_trials, derive_seed({cfg.seed, 3, s})).mean;
    sum.tail_pass = sum.tail_queries <= sum.q_truth + family.d + cfg.tail_slack;
  });
  double total = 0.0;
  double total_sq = 0.0;
  double n = 0.0;
  long a_rows = 0;
  long exceed = 0;
  out.tail_pass = true;
  for (std::size_t s = 0; s < S; ++s) {
    for (const auto& row : out.ledgers[s]) {
      total += row.regret;
      total_sq += row.regret * row.regret;
      n += 1.0;
    }
    a_rows += out.streams[s].a_branch;
    exceed += out.streams[s].exceedances;
    out.duplicates += out.streams[s].duplicates;
    out.tail_pass = out.tail_pass && out.streams[s].tail_pass;
  }
  out.mean_regret = total / n;
  const double var = n > 1.0 ? std::max(0.0, (total_sq - n * out.mean_regret * out.mean_regret) / (n - 1.0)) : 0.0;
  out.regret_se = std::sqrt(var / n);
  out.regret_upper = out.mean_regret + 1.645 * out.regret_se;
  out.exceedance_rate = a_rows > 0 ? static_cast<double>(exceed) / static_cast<double>(a_rows) : 0.0;
  out.regret_pass = out.regret_upper <= cfg.epsilon;
  out.exceedance_pass = out.exceedance_rate <= cfg.epsilon / 2.0;
  out.no_duplicates = out.duplicates == 0;
  return out;
}

}  // namespace priorest
