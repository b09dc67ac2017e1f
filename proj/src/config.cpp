#include "priorest/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

namespace priorest {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& text);

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
  std::vector<std::string> items;
  std::string body = text;
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ValidationError("config key '" + key + "': empty list entry");
    }
    items.push_back(item);
  }
  if (items.empty()) {
    throw ValidationError("config key '" + key + "': empty list");
  }
  return items;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ValidationError("config key '" + key + "': expected true or false, got '" + text + "'");
  } else if constexpr (std::is_integral_v<T>) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ValidationError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return value;
  } else if constexpr (std::is_same_v<T, double>) {
    try {
      return parse_double(text);
    } catch (const ValidationError&) {
      throw ValidationError("config key '" + key + "': expected a number, got '" + text + "'");
    }
  } else if constexpr (std::is_same_v<T, Rational>) {
    try {
      return parse_rational(text);
    } catch (const ValidationError&) {
      throw ValidationError("config key '" + key + "': expected a rational, got '" + text + "'");
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else {
    T out;
    for (const auto& item : split_list(key, text)) out.push_back(parse_value<typename T::value_type>(key, item));
    return out;
  }
}

template <typename T>
std::string format_value(const T& x) {
  if constexpr (std::is_same_v<T, bool>) {
    return x ? "true" : "false";
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(x);
  } else if constexpr (std::is_same_v<T, double>) {
    return format_double(x);
  } else if constexpr (std::is_same_v<T, Rational>) {
    return format_rational(x);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return x;
  } else {
    std::string out;
    for (const auto& item : x) {
      if (!out.empty()) out += ',';
      out += format_value(item);
    }
    return out;
  }
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Schema = std::map<std::string, Field>;

// `proj` maps a (const or mutable) RunConfig to the member it configures.
template <typename Proj>
Field field(Proj proj) {
  using T = std::remove_cvref_t<decltype(proj(std::declval<RunConfig&>()))>;
  return {[proj](RunConfig& c, const std::string& key, const std::string& v) { proj(c) = parse_value<T>(key, v); },
          [proj](const RunConfig& c) { return format_value(proj(c)); }};
}

Schema experiment_core() {
  return Schema{
      {"m", field([](auto& c) -> auto& { return c.experiment.m; })},
      {"d", field([](auto& c) -> auto& { return c.experiment.d; })},
      {"L", field([](auto& c) -> auto& { return c.experiment.L; })},
      {"alpha", field([](auto& c) -> auto& { return c.experiment.alpha; })},
      {"seed", field([](auto& c) -> auto& { return c.experiment.seed; })},
      {"max_members", field([](auto& c) -> auto& { return c.experiment.max_members; })},
  };
}

Schema rates_schema() {
  Schema s = experiment_core();
  s.insert({
      {"k", field([](auto& c) -> auto& { return c.experiment.k; })},
      {"family", field([](auto& c) -> auto& { return c.experiment.family; })},
      {"epsilon", field([](auto& c) -> auto& { return c.experiment.epsilon; })},
      {"T_grid", field([](auto& c) -> auto& { return c.experiment.T_grid; })},
      {"replicates", field([](auto& c) -> auto& { return c.experiment.replicates; })},
      {"sampled_truths", field([](auto& c) -> auto& { return c.experiment.sampled_truths; })},
      {"outcome_budget", field([](auto& c) -> auto& { return c.experiment.outcome_budget; })},
      {"baseline", field([](auto& c) -> auto& { return c.experiment.baseline; })},
      {"workers", field([](auto& c) -> auto& { return c.experiment.workers; })},
  });
  return s;
}

Schema lower_schema() {
  Schema s = experiment_core();
  s.insert({
      {"T_grid", field([](auto& c) -> auto& { return c.experiment.T_grid; })},
      {"replicates", field([](auto& c) -> auto& { return c.experiment.replicates; })},
      {"outcome_budget", field([](auto& c) -> auto& { return c.experiment.outcome_budget; })},
      {"m_from_T", field([](auto& c) -> auto& { return c.experiment.m_from_T; })},
      {"workers", field([](auto& c) -> auto& { return c.experiment.workers; })},
  });
  return s;
}

Schema cover_schema() {
  Schema s = experiment_core();
  s.insert({
      {"family", field([](auto& c) -> auto& { return c.experiment.family; })},
      {"epsilon", field([](auto& c) -> auto& { return c.experiment.epsilon; })},
  });
  return s;
}

Schema coin_schema() {
  return Schema{
      {"gammas", field([](auto& c) -> auto& { return c.coin.gammas; })},
      {"n_max", field([](auto& c) -> auto& { return c.coin.n_max; })},
  };
}

Schema lemma_schema() {
  return Schema{
      {"m", field([](auto& c) -> auto& { return c.lemma.m; })},
      {"d", field([](auto& c) -> auto& { return c.lemma.d; })},
      {"L", field([](auto& c) -> auto& { return c.lemma.L; })},
      {"alpha", field([](auto& c) -> auto& { return c.lemma.alpha; })},
      {"k_max", field([](auto& c) -> auto& { return c.lemma.k_max; })},
      {"tree_k", field([](auto& c) -> auto& { return c.lemma.tree_k; })},
      {"sauer_k", field([](auto& c) -> auto& { return c.lemma.sauer_k; })},
      {"pairs", field([](auto& c) -> auto& { return c.lemma.pairs; })},
      {"theorem2", field([](auto& c) -> auto& { return c.lemma.theorem2; })},
      {"seed", field([](auto& c) -> auto& { return c.lemma.seed; })},
  };
}

Schema smoothness_schema() {
  return Schema{
      {"m_max", field([](auto& c) -> auto& { return c.smoothness.m_max; })},
      {"d_max", field([](auto& c) -> auto& { return c.smoothness.d_max; })},
      {"L_values", field([](auto& c) -> auto& { return c.smoothness.L_values; })},
      {"alpha_values", field([](auto& c) -> auto& { return c.smoothness.alpha_values; })},
      {"sign_vectors", field([](auto& c) -> auto& { return c.smoothness.sign_vectors; })},
      {"seed", field([](auto& c) -> auto& { return c.smoothness.seed; })},
  };
}

Schema elicit_schema() {
  return Schema{
      {"n", field([](auto& c) -> auto& { return c.elicitation.family.n; })},
      {"functions", field([](auto& c) -> auto& { return c.elicitation.family.functions; })},
      {"members", field([](auto& c) -> auto& { return c.elicitation.family.members; })},
      {"width", field([](auto& c) -> auto& { return c.elicitation.family.width; })},
      {"family_seed", field([](auto& c) -> auto& { return c.elicitation.family.seed; })},
      {"epsilon", field([](auto& c) -> auto& { return c.elicitation.epsilon; })},
      {"T", field([](auto& c) -> auto& { return c.elicitation.T; })},
      {"streams", field([](auto& c) -> auto& { return c.elicitation.streams; })},
      {"calibration_grid", field([](auto& c) -> auto& { return c.elicitation.calibration_grid; })},
      {"calibration_replicates", field([](auto& c) -> auto& { return c.elicitation.calibration_replicates; })},
      {"safety", field([](auto& c) -> auto& { return c.elicitation.safety; })},
      {"tail", field([](auto& c) -> auto& { return c.elicitation.tail; })},
      {"tail_slack", field([](auto& c) -> auto& { return c.elicitation.tail_slack; })},
      {"q_trials", field([](auto& c) -> auto& { return c.elicitation.q_trials; })},
      {"seed", field([](auto& c) -> auto& { return c.elicitation.seed; })},
      {"workers", field([](auto& c) -> auto& { return c.elicitation.workers; })},
  };
}

const Schema& schema_for(const std::string& subcommand) {
  static const std::map<std::string, Schema> schemas{
      {"rates", rates_schema()},       {"lowerbound", lower_schema()}, {"coinbound", coin_schema()},
      {"lemmas", lemma_schema()},      {"smoothness", smoothness_schema()},
      {"elicit", elicit_schema()},     {"cover-info", cover_schema()}};
  const auto it = schemas.find(subcommand);
  if (it == schemas.end()) {
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  }
  return it->second;
}

void validate(const RunConfig& c) {
  const std::string& s = c.subcommand;
  if (s == "rates" || s == "lowerbound" || s == "cover-info") {
    c.experiment.validate();
    if (c.experiment.m < 1 || c.experiment.d < 1 || c.experiment.d > c.experiment.m) {
      throw ValidationError("need 1 <= d <= m");
    }
    if (!(c.experiment.L > 0.0) || !(c.experiment.alpha > 0.0 && c.experiment.alpha <= 1.0)) {
      throw ValidationError("need L > 0 and 0 < alpha <= 1");
    }
    static const std::set<std::string> families{"theorem2", "pair", "singleton", "grid"};
    if (!families.contains(c.experiment.family)) {
      throw ValidationError("family must be one of theorem2, pair, singleton, grid");
    }
  } else if (s == "coinbound") {
    c.coin.validate();
  } else if (s == "lemmas") {
    c.lemma.validate();
  } else if (s == "smoothness") {
    c.smoothness.validate();
  } else if (s == "elicit") {
    c.elicitation.validate();
  }
}

}  // namespace

CoinConfig::CoinConfig() {
  for (int i = 1; i <= 10; ++i) gammas.emplace_back(BigInt(i), BigInt(20));
}

void CoinConfig::validate() const {
  if (gammas.empty()) {
    throw ValidationError("gammas must list at least one value");
  }
  for (const auto& g : gammas) {
    if (g <= 0 || g >= 1) {
      throw ValidationError("every gamma must lie in (0, 1)");
    }
  }
  if (n_max < 0) {
    throw ValidationError("n_max must be nonnegative");
  }
}


std::uint64_t RunConfig::seed() const {
  if (subcommand == "elicit") return elicitation.seed;
  if (subcommand == "lemmas") return lemma.seed;
  if (subcommand == "smoothness") return smoothness.seed;
  return experiment.seed;
}

void RunConfig::set_seed(std::uint64_t seed) {
  experiment.seed = seed;
  elicitation.seed = seed;
  lemma.seed = seed;
  smoothness.seed = seed;
}

void RunConfig::set_workers(int workers) {
  if (workers < 1) {
    throw ValidationError("workers must be at least 1");
  }
  experiment.workers = workers;
  elicitation.workers = workers;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, field] : schema_for(subcommand)) {
    if (key == "workers") continue;
    out += key + " = " + field.get(*this) + "\n";
  }
  return out;
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ValidationError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ValidationError("config key '" + key + "' given twice");
    }
  }
  return kv;
}

RunConfig default_config(const std::string& subcommand) {
  schema_for(subcommand);
  RunConfig c;
  c.subcommand = subcommand;
  if (subcommand == "lowerbound") {
    c.experiment.T_grid = {100, 1000};
    c.experiment.replicates = 200;
  }
  return c;
}

RunConfig apply_config(const std::string& subcommand, const std::map<std::string, std::string>& kv) {
  RunConfig c = default_config(subcommand);
  const Schema& schema = schema_for(subcommand);
  for (const auto& [key, value] : kv) {
    const auto it = schema.find(key);
    if (it == schema.end()) {
      throw ValidationError("unknown config key '" + key + "' for " + subcommand);
    }
    it->second.set(c, key, value);
  }
  if (subcommand == "rates" || subcommand == "lowerbound") {
    for (const char* key : {"m", "d", "L", "alpha", "T_grid"}) {
      if (!kv.contains(key)) {
        throw ValidationError(std::string("missing required config key '") + key + "'");
      }
    }
  }
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& path, const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file '" + path + "'");
  }
  RunConfig c = apply_config(subcommand, read_key_values(in));
  c.path = path;
  return c;
}

}  // namespace priorest
