#include "priorest/rate_lab.hpp"

#include "priorest/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace priorest {

void ExperimentConfig::validate() const {
  if (T_grid.empty()) {
    throw ValidationError("T_grid must list at least one horizon");
  }
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    if (T_grid[i] < 0) {
      throw ValidationError("T_grid entries must be nonnegative");
    }
    if (i > 0 && T_grid[i] <= T_grid[i - 1]) {
      throw ValidationError("T_grid must be strictly increasing");
    }
  }
  if (replicates < 1) {
    throw ValidationError("replicates must be at least 1");
  }
  if (k < 0) {
    throw ValidationError("k must be at least 1 (or 0 for the default k = d)");
  }
  if (workers < 1) {
    throw ValidationError("workers must be at least 1");
  }
  if (sampled_truths < 1) {
    throw ValidationError("sampled_truths must be at least 1");
  }
}

double upper_rate_exponent(int d, double alpha) {
  return alpha * alpha / (2.0 * (d + 2.0 * alpha) * (alpha + 2.0 * (d + 1)));
}

double lower_rate_exponent(int d, double alpha) { return alpha / (2.0 * (d + alpha)); }

RateFit fit_rate_exponent(const std::vector<RatePoint>& points) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    if (p.mean > 0.0 && p.T > 0) {
      xs.push_back(std::log(static_cast<double>(p.T)));
      ys.push_back(std::log(p.mean));
    }
  }
  if (xs.size() < 3) {
    throw ValidationError("rate fit needs at least 3 points with positive risk, got " +
                          std::to_string(xs.size()));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[static_cast<std::size_t>(i)];
    y[i] = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  RateFit fit;
  fit.intercept = beta[0];
  fit.slope = beta[1];
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.used = static_cast<int>(n);
  return fit;
}

bool nonincreasing_within(const std::vector<RatePoint>& points, double z) {
  for (std::size_t j = 1; j < points.size(); ++j) {
    const double slack = z * std::hypot(points[j - 1].se, points[j].se);
    if (points[j].mean > points[j - 1].mean + slack) return false;
  }
  return true;
}

CoverFamily build_family(const ExperimentConfig& cfg, SpacePtr space) {
  if (cfg.family == "theorem2") {
    return theorem2_family(space, cfg.L, cfg.alpha, cfg.max_members);
  }
  if (cfg.family == "pair") {
    CoverFamily fam;
    fam.members.push_back(point_mass<double>(space, 0));
    fam.members.push_back(point_mass<double>(space, 1));
    fam.labels = {"empty", "first_point"};
    return fam;
  }
  if (cfg.family == "singleton") {
    CoverFamily fam;
    fam.members.push_back(reference_prior<double>(space));
    fam.labels = {"reference"};
    return fam;
  }
  if (cfg.family == "grid") {
    return cover_priors(space, cfg.L, cfg.alpha, cfg.epsilon, cfg.max_members);
  }
  throw ValidationError("unknown family '" + cfg.family + "' (theorem2, pair, singleton, grid)");
}

std::vector<int> choose_truths(int family_size, int sampled, std::uint64_t seed) {
  std::vector<int> out;
  if (family_size <= 10) {
    for (int i = 0; i < family_size; ++i) out.push_back(i);
    return out;
  }
  std::set<int> picked{0, family_size - 1};
  Rng rng(seed, 0, Purpose::truths);
  const int target = std::min(family_size, sampled + 2);
  while (static_cast<int>(picked.size()) < target) {
    picked.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(family_size))));
  }
  return std::vector<int>(picked.begin(), picked.end());
}

namespace {

struct UnitResult {
  int selected = -1;
  double tv_error = 0.0;
  double max_dev = 0.0;
  bool decomposition = true;
  int direct_selected = -1;
  double direct_error = 0.0;
};

struct Summary {
  double mean = 0.0;
  double se = 0.0;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

RatePoint make_point(long T, const std::vector<int>& truths, int reps,
                     const std::function<double(std::size_t, int)>& error_of) {
  RatePoint point;
  point.T = T;
  double total = 0.0;
  for (std::size_t s = 0; s < truths.size(); ++s) {
    std::vector<double> errs(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) errs[static_cast<std::size_t>(r)] = error_of(s, r);
    const Summary sum = summarize(errs);
    total += sum.mean;
    if (point.worst_truth < 0 || sum.mean > point.mean) {
      point.mean = sum.mean;
      point.se = sum.se;
      point.worst_truth = truths[s];
    }
  }
  point.average = total / static_cast<double>(truths.size());
  return point;
}

}  // namespace

UpperResult run_upper_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int k = cfg.samples_per_task();
  auto space = enumerate_concepts(cfg.m, cfg.d);
  const auto dist = DataDistribution::uniform(cfg.m);
  UpperResult result;
  result.family = build_family(cfg, space);
  const CoverFamily& fam = result.family;
  const int n = fam.size();
  for (long T : cfg.T_grid) {
    if (T < 1) {
      throw ValidationError("the upper experiment needs T >= 1");
    }
  }
  const auto est = SkeletonEstimator::for_outcomes(fam, dist, k, cfg.outcome_budget);
  std::optional<SkeletonEstimator> direct;
  if (cfg.baseline) direct.emplace(SkeletonEstimator::for_concepts(fam));

  Eigen::MatrixXd prior_tv(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) prior_tv(i, j) = tv(fam.members[static_cast<std::size_t>(i)], fam.members[static_cast<std::size_t>(j)]);
  }
  result.truths = choose_truths(n, cfg.sampled_truths, cfg.seed);
  const auto& truths = result.truths;
  const std::size_t per_T = truths.size() * static_cast<std::size_t>(cfg.replicates);
  const std::size_t units = per_T * cfg.T_grid.size();
  std::vector<UnitResult> out(units);

  parallel_for(units, cfg.workers, [&](std::size_t u) {
    const std::size_t ti = u / per_T;
    const std::size_t rest = u % per_T;
    const int truth = truths[rest / static_cast<std::size_t>(cfg.replicates)];
    const int rep = static_cast<int>(rest % static_cast<std::size_t>(cfg.replicates));
    const long T = cfg.T_grid[ti];
    const std::uint64_t unit_seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(T),
                                                 static_cast<std::uint64_t>(truth), static_cast<std::uint64_t>(rep)});
    const TaskStream stream(fam.members[static_cast<std::size_t>(truth)], dist, k, unit_seed);
    auto acc = est.accumulator();
    std::optional<SkeletonEstimator::Accumulator> dacc;
    if (direct) dacc.emplace(direct->accumulator());
    TaskSample task;
    for (long t = 0; t < T; ++t) {
      stream.generate(static_cast<std::uint64_t>(t), task);
      acc.add(outcome_key(task.xs, task.ys, cfg.m));
      if (dacc) dacc->add(task.target.positives);
    }
    const auto sel = est.select(acc);
    UnitResult r;
    r.selected = sel.selected;
    r.tv_error = prior_tv(sel.selected, truth);
    const auto dec = check_decomposition(est, sel, truth);
    r.max_dev = dec.max_dev;
    r.decomposition = dec.pass;
    if (dacc) {
      r.direct_selected = direct->select(*dacc).selected;
      r.direct_error = prior_tv(r.direct_selected, truth);
    }
    out[u] = r;
  });

  auto unit = [&](std::size_t ti, std::size_t s, int r) -> const UnitResult& {
    return out[ti * per_T + s * static_cast<std::size_t>(cfg.replicates) + static_cast<std::size_t>(r)];
  };

  result.curve.upper_exponent = upper_rate_exponent(cfg.d, cfg.alpha);
  result.curve.lower_exponent = lower_rate_exponent(cfg.d, cfg.alpha);
  if (cfg.baseline) {
    result.baseline.emplace();
    result.baseline->upper_exponent = result.curve.upper_exponent;
    result.baseline->lower_exponent = result.curve.lower_exponent;
  }
  for (std::size_t ti = 0; ti < cfg.T_grid.size(); ++ti) {
    const long T = cfg.T_grid[ti];
    result.curve.points.push_back(make_point(T, truths, cfg.replicates, [&](std::size_t s, int r) {
      return unit(ti, s, r).tv_error;
    }));
    if (cfg.baseline) {
      result.baseline->points.push_back(make_point(T, truths, cfg.replicates, [&](std::size_t s, int r) {
        return unit(ti, s, r).direct_error;
      }));
      std::vector<double> gaps;
      for (std::size_t s = 0; s < truths.size(); ++s) {
        for (int r = 0; r < cfg.replicates; ++r) gaps.push_back(unit(ti, s, r).direct_error - unit(ti, s, r).tv_error);
      }
      const Summary g = summarize(gaps);
      result.paired_gap.push_back(g.mean);
      result.paired_se.push_back(g.se);
    }
  }
  try {
    result.curve.fit = fit_rate_exponent(result.curve.points);
  } catch (const ValidationError&) {
    result.curve.fit.reset();
  }
  if (result.baseline) {
    try {
      result.baseline->fit = fit_rate_exponent(result.baseline->points);
    } catch (const ValidationError&) {
      result.baseline->fit.reset();
    }
  }

  for (int pass = 0; pass < (cfg.baseline ? 2 : 1); ++pass) {
    for (std::size_t ti = 0; ti < cfg.T_grid.size(); ++ti) {
      for (std::size_t s = 0; s < truths.size(); ++s) {
        for (int r = 0; r < cfg.replicates; ++r) {
          const auto& u = unit(ti, s, r);
          RunRow row;
          row.experiment = pass == 0 ? "upper" : "direct";
          row.T = cfg.T_grid[ti];
          row.replicate = r;
          row.truth_id = truths[s];
          row.selected_id = pass == 0 ? u.selected : u.direct_selected;
          row.tv_error = pass == 0 ? u.tv_error : u.direct_error;
          row.max_yatracos_dev = pass == 0 ? u.max_dev : 0.0;
          row.decomposition_pass = pass == 0 ? u.decomposition : true;
          if (pass == 0 && !u.decomposition) ++result.decomposition_failures;
          result.rows.push_back(row);
        }
      }
    }
  }
  return result;
}

double log_lower_bound_floor(double gamma, int d, double L, double alpha, double T) {
  const double expo = 43.0 * std::pow(2.0 / L, 2.0 * d / alpha) * std::pow(static_cast<double>(d), 2.0 * d) *
                      std::pow(gamma, 2.0 + 2.0 * d / alpha) * T;
  return std::log(gamma / (32.0 * std::ldexp(1.0, d))) - expo;
}

double lower_bound_floor(double gamma, int d, double L, double alpha, double T) {
  return std::exp(log_lower_bound_floor(gamma, d, L, alpha, T));
}

int m_from_T(double T, int d, double L, double alpha) {
  if (!(T > 0.0)) {
    throw ValidationError("m_from_T needs T > 0");
  }
  const double inner = 43.0 * std::pow(2.0 / L, 2.0 * d / alpha) * std::pow(static_cast<double>(d), 2.0 * d) * T;
  const double m = std::ceil(std::pow(L / 2.0, 1.0 / alpha) * std::pow(inner, 1.0 / (2.0 * (d + alpha))));
  if (m > kMaxPoints) {
    throw BudgetError("m_from_T gives m = " + format_double(m) + ", beyond the instance-space limit");
  }
  return std::max(static_cast<int>(m), d);
}

LowerResult run_lower_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int d = cfg.d;
  struct Setup {
    SpacePtr space;
    CoverFamily family;
    std::optional<SkeletonEstimator> est;
  };
  std::map<int, Setup> setups;
  std::vector<int> m_of(cfg.T_grid.size());
  for (std::size_t ti = 0; ti < cfg.T_grid.size(); ++ti) {
    const long T = cfg.T_grid[ti];
    const int m = cfg.m_from_T && T > 0 ? m_from_T(static_cast<double>(T), d, cfg.L, cfg.alpha) : cfg.m;
    m_of[ti] = m;
    if (!setups.count(m)) {
      Setup s;
      s.space = enumerate_concepts(m, d);
      s.family = theorem2_family(s.space, cfg.L, cfg.alpha, cfg.max_members);
      s.est.emplace(SkeletonEstimator::for_outcomes(s.family, DataDistribution::uniform(m), d, cfg.outcome_budget));
      setups.emplace(m, std::move(s));
    }
  }

  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t units = reps * cfg.T_grid.size();
  std::vector<double> errors(units);
  std::vector<double> events(units);
  parallel_for(units, cfg.workers, [&](std::size_t u) {
    const std::size_t ti = u / reps;
    const std::uint64_t rep = u % reps;
    const long T = cfg.T_grid[ti];
    const int m = m_of[ti];
    const Setup& setup = setups.at(m);
    const std::size_t nsub = setup.space->d_subsets().size();
    Rng sign_rng(cfg.seed, derive_seed({static_cast<std::uint64_t>(T), rep}), Purpose::signs);
    std::vector<int> b(nsub);
    for (auto& s : b) s = sign_rng.bernoulli(0.5) ? +1 : -1;
    const auto params = SmoothPriorParams::make(m, d, cfg.L, cfg.alpha, b);
    const auto dist = DataDistribution::uniform(m);

    std::vector<std::uint64_t> counts(nsub, 0);
    TabularPrior<double> estimate = reference_prior<double>(setup.space);
    if (T > 0) {
      const std::uint64_t unit_seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(T), rep});
      const TaskStream stream(params, setup.space, dist, d, unit_seed);
      auto acc = setup.est->accumulator();
      TaskSample task;
      for (long t = 0; t < T; ++t) {
        stream.generate(static_cast<std::uint64_t>(t), task);
        acc.add(outcome_key(task.xs, task.ys, m));
        const int i = task.trace->i_star;
        if (covers_subset(task, setup.space->d_subsets()[static_cast<std::size_t>(i)])) {
          ++counts[static_cast<std::size_t>(i)];
        }
      }
      estimate = setup.family.members[static_cast<std::size_t>(setup.est->select(acc).selected)];
    }
    errors[u] = reduction_error(reduce_to_signs(estimate, params), params);
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    events[u] = total / static_cast<double>(nsub);
  });

  LowerResult result;
  result.errors = errors;
  for (std::size_t ti = 0; ti < cfg.T_grid.size(); ++ti) {
    const long T = cfg.T_grid[ti];
    const int m = m_of[ti];
    const std::vector<double> errs(errors.begin() + static_cast<long>(ti * reps),
                                   errors.begin() + static_cast<long>((ti + 1) * reps));
    const std::vector<double> evs(events.begin() + static_cast<long>(ti * reps),
                                  events.begin() + static_cast<long>((ti + 1) * reps));
    const Summary e = summarize(errs);
    const Summary ev = summarize(evs);
    LowerPoint p;
    p.T = T;
    p.m = m;
    p.gamma = gamma_for(m, cfg.L, cfg.alpha);
    p.replicates = cfg.replicates;
    p.mean_error = e.mean;
    p.se = e.se;
    p.log_floor = log_lower_bound_floor(p.gamma, d, cfg.L, cfg.alpha, static_cast<double>(T));
    const double lower = p.mean_error - 1.645 * p.se;
    p.pass = lower > 0.0 && std::log(lower) > p.log_floor;
    const double nsub = static_cast<double>(binomial(m, d));
    double fact = 1.0;
    for (int j = 2; j <= d; ++j) fact *= j;
    const double per_task = fact * std::pow(1.0 / m, d) / nsub;
    const double q = per_task * nsub;
    p.mean_events = ev.mean;
    p.expected_events = per_task * static_cast<double>(T);
    p.events_sigma = std::sqrt(static_cast<double>(T) * q * (1.0 - q) / static_cast<double>(cfg.replicates)) / nsub;
    p.events_pass = std::abs(p.mean_events - p.expected_events) <= 3.0 * p.events_sigma + 1e-12;
    result.points.push_back(p);
  }
  return result;
}

}  // namespace priorest
