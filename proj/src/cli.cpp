#include "priorest/cli.hpp"

#include "priorest/coin_bound.hpp"
#include "priorest/csv.hpp"
#include "priorest/suites.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace priorest {

namespace fs = std::filesystem;

namespace {

std::string num(double x) { return format_double(x); }
std::string flag(bool b) { return b ? "true" : "false"; }


const std::vector<std::string> kRatesHeader{"experiment", "m",         "d",           "L",       "alpha", "k",
                                            "T",          "replicate", "truth_id", "selected_id", "tv_error"};
const std::vector<std::string> kChecksHeader{"check", "instance", "k", "lhs", "rhs", "pass"};

void write_checks(const fs::path& path, const std::vector<CheckRow>& rows) {
  CsvWriter csv(path, kChecksHeader);
  for (const auto& r : rows) {
    csv.row({r.check, r.instance, std::to_string(r.k), num(r.lhs), num(r.rhs), flag(r.pass)});
  }
}

std::string checks_summary(const std::vector<CheckRow>& rows) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  for (const auto& r : rows) {
    auto& [total, failed] = tally[r.check];
    ++total;
    if (!r.pass) ++failed;
  }
  std::ostringstream out;
  std::size_t failures = 0;
  for (const auto& [check, t] : tally) {
    out << check << ": " << t.first << " rows, " << t.second << " failed\n";
    failures += t.second;
  }
  out << "all_pass = " << flag(failures == 0) << "\n";
  return out.str();
}


std::string rates_plot_script() {
  return R"py(import csv
import collections
import math
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("rates.csv")))
series = collections.defaultdict(lambda: collections.defaultdict(list))
for r in rows:
    series[r["experiment"]][int(r["T"])].append(float(r["tv_error"]))
for name, by_t in sorted(series.items()):
    ts = sorted(t for t in by_t if t > 0)
    means = [sum(by_t[t]) / len(by_t[t]) for t in ts]
    pts = [(t, v) for t, v in zip(ts, means) if v > 0]
    if pts:
        plt.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=name)
plt.xlabel("T")
plt.ylabel("mean tv error")
plt.legend()
plt.savefig("rates.png", dpi=120)
)py";
}

std::string elicit_plot_script() {
  return R"py(import csv
import glob
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

for path in sorted(glob.glob("ledger_*.csv")):
    rows = list(csv.DictReader(open(path)))
    t = [int(r["t"]) for r in rows]
    q = [int(r["queries"]) for r in rows]
    run, acc = [], 0
    for i, v in enumerate(q, 1):
        acc += v
        run.append(acc / i)
    plt.plot(t, run, linewidth=0.7)
plt.xlabel("customer t")
plt.ylabel("running mean queries")
plt.yscale("log")
plt.savefig("queries.png", dpi=120)
)py";
}

std::string checks_plot_script() {
  return R"py(import csv
import collections
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("checks.csv")))
by_check = collections.defaultdict(list)
for r in rows:
    rhs = float(r["rhs"])
    if rhs > 0:
        by_check[r["check"]].append(float(r["lhs"]) / rhs)
plt.boxplot(list(by_check.values()), labels=list(by_check.keys()))
plt.ylabel("lhs / rhs")
plt.savefig("checks.png", dpi=120)
)py";
}

std::string coin_plot_script() {
  return R"py(import csv
import collections
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("coinbound.csv")))
by_gamma = collections.defaultdict(list)
for r in rows:
    by_gamma[r["gamma"]].append((int(r["n"]), float(r["bayes_error"]), float(r["floor"])))
for g, pts in by_gamma.items():
    line, = plt.semilogy([p[0] for p in pts], [p[1] for p in pts], label="gamma=" + g)
    plt.semilogy([p[0] for p in pts], [max(p[2], 1e-300) for p in pts], "--", color=line.get_color())
plt.xlabel("n")
plt.ylabel("Bayes error (solid), floor (dashed)")
plt.legend(fontsize=6)
plt.savefig("coinbound.png", dpi=120)
)py";
}

void run_rates(const RunConfig& rc, const fs::path& out, std::ostream& log) {
  const ExperimentConfig& cfg = rc.experiment;
  const UpperResult res = run_upper_experiment(cfg);
  const int k = cfg.samples_per_task();
  {
    CsvWriter csv(out / "rates.csv", kRatesHeader);
    for (const auto& r : res.rows) {
      csv.row({r.experiment, std::to_string(cfg.m), std::to_string(cfg.d), num(cfg.L), num(cfg.alpha),
               std::to_string(r.experiment == "direct" ? 0 : k), std::to_string(r.T), std::to_string(r.replicate),
               std::to_string(r.truth_id), std::to_string(r.selected_id), num(r.tv_error)});
    }
  }
  {
    CsvWriter csv(out / "estimation.csv", {"replicate", "T", "selected", "tv_to_truth", "max_yatracos_dev"});
    for (const auto& r : res.rows) {
      if (r.experiment != "upper") continue;
      csv.row({std::to_string(r.replicate), std::to_string(r.T), std::to_string(r.selected_id), num(r.tv_error),
               num(r.max_yatracos_dev)});
    }
  }
  std::ostringstream s;
  s << "family = " << cfg.family << " (" << res.family.size() << " members)\n";
  s << "truths =";
  for (int t : res.truths) s << ' ' << t;
  s << "\n";
  s << "theory_upper_exponent = " << num(res.curve.upper_exponent) << "\n";
  s << "theory_lower_exponent = " << num(res.curve.lower_exponent) << "\n";
  auto curve = [&](const std::string& name, const RateCurve& c) {
    for (const auto& p : c.points) {
      s << name << " T=" << p.T << " worst_mean=" << num(p.mean) << " se=" << num(p.se)
        << " worst_truth=" << p.worst_truth << " average=" << num(p.average) << "\n";
    }
    if (c.fit) {
      s << name << "_fit_slope = " << num(c.fit->slope) << " (r2 " << num(c.fit->r2) << ", " << c.fit->used
        << " points)\n";
    } else {
      s << name << "_fit_slope = unavailable (fewer than 3 horizons with positive risk)\n";
    }
    s << name << "_nonincreasing_within_2se = " << flag(nonincreasing_within(c.points, 2.0)) << "\n";
  };
  curve("skeleton", res.curve);
  if (res.baseline) {
    curve("direct", *res.baseline);
    for (std::size_t i = 0; i < res.paired_gap.size(); ++i) {
      s << "paired_gap T=" << res.curve.points[i].T << " direct_minus_skeleton=" << num(res.paired_gap[i])
        << " se=" << num(res.paired_se[i]) << "\n";
    }
  }
  s << "decomposition_failures = " << res.decomposition_failures << "\n";
  write_text(out / "summary.txt", s.str());
  write_text(out / "plot_rates.py", rates_plot_script());
  log << s.str();
}

void run_lowerbound(const RunConfig& rc, const fs::path& out, std::ostream& log) {
  const ExperimentConfig& cfg = rc.experiment;
  const LowerResult res = run_lower_experiment(cfg);
  {
    CsvWriter csv(out / "rates.csv", kRatesHeader);
    std::size_t i = 0;
    for (const auto& p : res.points) {
      for (int r = 0; r < p.replicates; ++r) {
        csv.row({"lower", std::to_string(p.m), std::to_string(cfg.d), num(cfg.L), num(cfg.alpha),
                 std::to_string(cfg.samples_per_task()), std::to_string(p.T), std::to_string(r), "-1", "-1",
                 num(res.errors[i++])});
      }
    }
  }
  {
    CsvWriter csv(out / "lowerbound.csv",
                  {"T", "m", "gamma", "replicates", "mean_error", "se", "log_floor", "pass", "mean_events",
                   "expected_events", "events_sigma", "events_pass"});
    for (const auto& p : res.points) {
      csv.row({std::to_string(p.T), std::to_string(p.m), num(p.gamma), std::to_string(p.replicates),
               num(p.mean_error), num(p.se), num(p.log_floor), flag(p.pass), num(p.mean_events),
               num(p.expected_events), num(p.events_sigma), flag(p.events_pass)});
    }
  }
  std::ostringstream s;
  s << "theory_lower_exponent = " << num(lower_rate_exponent(cfg.d, cfg.alpha)) << "\n";
  bool all = true;
  for (const auto& p : res.points) {
    s << "T=" << p.T << " m=" << p.m << " mean_error=" << num(p.mean_error) << " se=" << num(p.se)
      << " log_floor=" << num(p.log_floor) << " pass=" << flag(p.pass) << " events=" << num(p.mean_events)
      << " expected=" << num(p.expected_events) << " events_pass=" << flag(p.events_pass) << "\n";
    all = all && p.pass && p.events_pass;
  }
  s << "all_pass = " << flag(all) << "\n";
  write_text(out / "summary.txt", s.str());
  write_text(out / "plot_rates.py", rates_plot_script());
  log << s.str();
}

void run_coinbound(const RunConfig& rc, const fs::path& out, std::ostream& log) {
  std::vector<int> ns;
  for (int n = 0; n <= rc.coin.n_max; ++n) ns.push_back(n);
  const auto rows = coin_bound_table(rc.coin.gammas, ns);
  std::size_t failures = 0;
  {
    CsvWriter csv(out / "coinbound.csv", {"gamma", "n", "bayes_error", "floor", "pass"});
    for (const auto& r : rows) {
      csv.row({format_rational(r.gamma), std::to_string(r.n), num(to_double(r.bayes_error)), num(std::exp(r.log_floor)),
               flag(r.pass)});
      if (!r.pass) ++failures;
    }
  }
  std::ostringstream s;
  s << "rows = " << rows.size() << "\nviolations = " << failures << "\nall_pass = " << flag(failures == 0) << "\n";
  write_text(out / "summary.txt", s.str());
  write_text(out / "plot_coinbound.py", coin_plot_script());
  log << s.str();
}

void run_checks(const std::vector<CheckRow>& rows, const fs::path& out, std::ostream& log) {
  write_checks(out / "checks.csv", rows);
  const std::string s = checks_summary(rows);
  write_text(out / "summary.txt", s);
  write_text(out / "plot_checks.py", checks_plot_script());
  log << s;
}

void run_elicit(const RunConfig& rc, const fs::path& out, std::ostream& log) {
  const ElicitationConfig& cfg = rc.elicitation;
  const ElicitationResult res = run_elicitation(cfg);
  {
    std::ofstream menu(out / "menu.tsv", std::ios::binary);
    write_menu(menu, res.family.menu);
  }
  {
    CsvWriter csv(out / "schedule.csv", {"T", "R", "delta", "raw_quantile"});
    for (std::size_t i = 0; i < res.schedule.T_grid.size(); ++i) {
      csv.row({std::to_string(res.schedule.T_grid[i]), num(res.schedule.R[i]), num(res.schedule.delta[i]),
               num(res.schedule.raw_quantile[i])});
    }
  }
  const int width = static_cast<int>(std::to_string(std::max(0, cfg.streams - 1)).size());
  for (std::size_t s = 0; s < res.ledgers.size(); ++s) {
    std::string id = std::to_string(s);
    id.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0');
    CsvWriter csv(out / ("ledger_" + id + ".csv"), {"t", "branch", "queries", "regret", "theta_check", "R_used"});
    for (const auto& row : res.ledgers[s]) {
      csv.row({std::to_string(row.t), row.a_branch ? "A" : "A_prime", std::to_string(row.queries), num(row.regret),
               std::to_string(row.theta_check), num(row.R_used)});
    }
  }
  {
    CsvWriter csv(out / "streams.csv", {"stream", "truth", "mean_regret", "tail_queries", "q_truth", "a_branch",
                                        "first_a_branch", "exceedances", "duplicates", "tail_pass"});
    for (const auto& st : res.streams) {
      csv.row({std::to_string(st.stream), std::to_string(st.truth), num(st.mean_regret), num(st.tail_queries),
               num(st.q_truth), std::to_string(st.a_branch), std::to_string(st.first_a_branch),
               std::to_string(st.exceedances), std::to_string(st.duplicates), flag(st.tail_pass)});
    }
  }
  std::ostringstream s;
  s << "items = " << res.family.menu.n << "\nfunctions = " << res.family.functions.functions()
    << "\nmembers = " << res.family.size() << "\npseudo_dimension = " << res.family.d << "\n";
  s << "calibration = " << res.schedule.method << " quantile at alpha=" << num(res.schedule.alpha)
    << ", safety " << num(res.schedule.safety) << ", " << res.schedule.samples_per_T << " samples per T\n";
  s << "mean_regret = " << num(res.mean_regret) << " se=" << num(res.regret_se)
    << " upper95=" << num(res.regret_upper) << " epsilon=" << num(cfg.epsilon) << " pass=" << flag(res.regret_pass)
    << "\n";
  s << "duplicates = " << res.duplicates << " pass=" << flag(res.no_duplicates) << "\n";
  s << "exceedance_rate = " << num(res.exceedance_rate) << " limit=" << num(cfg.epsilon / 2.0)
    << " pass=" << flag(res.exceedance_pass) << "\n";
  s << "tail_queries (last " << cfg.tail << " customers, slack " << num(cfg.tail_slack)
    << ", a finite-horizon surrogate) pass=" << flag(res.tail_pass) << "\n";
  write_text(out / "summary.txt", s.str());
  write_text(out / "plot_elicit.py", elicit_plot_script());
  log << s.str();
}

void run_cover_info(const RunConfig& rc, const fs::path& out, std::ostream& log) {
  const ExperimentConfig& cfg = rc.experiment;
  const SpacePtr space = enumerate_concepts(cfg.m, cfg.d);
  const CoverFamily fam = build_family(cfg, space);
  CsvWriter csv(out / "cover.csv", {"member", "label", "nearest", "nearest_tv"});
  double min_sep = std::numeric_limits<double>::infinity();
  for (int i = 0; i < fam.size(); ++i) {
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < fam.size(); ++j) {
      if (j == i) continue;
      const double t = tv(fam.members[static_cast<std::size_t>(i)], fam.members[static_cast<std::size_t>(j)]);
      if (t < best) {
        best = t;
        nearest = j;
      }
    }
    min_sep = std::min(min_sep, best);
    csv.row({std::to_string(i), fam.labels[static_cast<std::size_t>(i)], std::to_string(nearest),
             nearest < 0 ? "" : num(best)});
  }
  std::ostringstream s;
  s << "family = " << cfg.family << "\nconcepts = " << space->size() << "\nmembers = " << fam.size()
    << "\nepsilon = " << num(fam.epsilon) << "\nmin_separation = " << (fam.size() > 1 ? num(min_sep) : "none") << "\n";
  write_text(out / "summary.txt", s.str());
  log << s.str();
}

}  // namespace

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string usage_text() {
  std::string s = "usage: priorest <subcommand> [--config PATH] [--seed N] [--out DIR] [--workers N]\n"
                  "                [--exact-rational BOOL]\n"
                  "subcommands:";
  for (const auto& name : subcommands()) s += " " + name;
  s += "\noutput directory defaults to $" + std::string(kOutEnv) + ", then ./priorest-out\n";
  return s;
}

int dispatch(const RunOptions& options, std::ostream& log, std::ostream& err) {
  try {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), options.subcommand) == names.end()) {
      err << "unknown subcommand '" << options.subcommand << "'\n" << usage_text();
      return 1;
    }
    RunConfig rc = options.config ? parse_config(*options.config, options.subcommand)
                                  : default_config(options.subcommand);
    if (options.seed) rc.set_seed(*options.seed);
    if (options.workers) rc.set_workers(*options.workers);
    fs::create_directories(options.out);
    const std::string canonical = rc.canonical();
    write_text(options.out / "config.txt", canonical);
    const std::string& sub = options.subcommand;
    if (sub == "rates") {
      run_rates(rc, options.out, log);
    } else if (sub == "lowerbound") {
      run_lowerbound(rc, options.out, log);
    } else if (sub == "coinbound") {
      run_coinbound(rc, options.out, log);
    } else if (sub == "lemmas") {
      run_checks(options.exact_rational ? lemma_suite<Rational>(rc.lemma) : lemma_suite<double>(rc.lemma),
                 options.out, log);
    } else if (sub == "smoothness") {
      run_checks(options.exact_rational ? smoothness_suite<Rational>(rc.smoothness)
                                        : smoothness_suite<double>(rc.smoothness),
                 options.out, log);
    } else if (sub == "elicit") {
      run_elicit(rc, options.out, log);
    } else {
      run_cover_info(rc, options.out, log);
    }
    std::ostringstream manifest;
    manifest << "subcommand = " << sub << "\n"
             << "config = " << (rc.path.empty() ? "(defaults)" : rc.path) << "\n"
             << "seed = " << rc.seed() << "\n"
             << "output = " << options.out.string() << "\n"
             << "exact_rational = " << flag(options.exact_rational) << "\n"
             << "version = " << kVersion << "\n"
             << "config_hash = " << config_hash(canonical) << "\n";
    write_text(options.out / "manifest.txt", manifest.str());
    return 0;
  } catch (const BudgetError& e) {
    err << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Prior estimation workbench", "priorest"};
  RunOptions options;
  std::string config;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
  std::string exact = "false";
  app.add_option("subcommand", options.subcommand, "one of the subcommands below")->required();
  auto* config_opt = app.add_option("--config", config, "key = value config file");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  auto* out_opt = app.add_option("--out", out, "output directory");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--exact-rational", exact, "exact rational arithmetic for check suites")
      ->check(CLI::IsMember({"true", "false", "1", "0"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    log << app.help() << usage_text();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << usage_text();
    return 1;
  }
  if (*config_opt) options.config = config;
  if (*seed_opt) options.seed = seed;
  if (*workers_opt) options.workers = workers;
  options.exact_rational = exact == "true" || exact == "1";
  if (*out_opt) {
    options.out = out;
  } else if (const char* env = std::getenv(kOutEnv); env && *env) {
    options.out = env;
  }
  return dispatch(options, log, err);
}

}  // namespace priorest
