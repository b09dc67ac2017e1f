#pragma once

#include "priorest/elicitation.hpp"
#include "priorest/rate_lab.hpp"
#include "priorest/suites.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace priorest {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"rates",      "lowerbound", "coinbound", "lemmas",
                                              "smoothness", "elicit",     "cover-info"};
  return names;
}

struct CoinConfig {
  std::vector<Rational> gammas;  ///< default 1/20, 2/20, ..., 10/20
  int n_max = 200;

  CoinConfig();
  void validate() const;
};

/// Everything a subcommand can read; only the block for `subcommand` is used.
struct RunConfig {
  std::string subcommand;
  std::string path;  ///< empty when defaults were used
  ExperimentConfig experiment;
  ElicitationConfig elicitation;
  CoinConfig coin;
  LemmaConfig lemma;
  SmoothnessConfig smoothness;

  std::uint64_t seed() const;
  void set_seed(std::uint64_t seed);
  void set_workers(int workers);
  /// Canonical `key = value` listing of the effective settings.
  std::string canonical() const;
};

/// `key = value` lines; blank lines and `#` comments are skipped. Duplicate
/// keys and malformed lines are errors.
std::map<std::string, std::string> read_key_values(std::istream& in);

/// Defaults for the subcommand's block; lowerbound defaults to 200 replicates
/// over T in {100, 1000}.
RunConfig default_config(const std::string& subcommand);

/// Applies a key/value table on top of the defaults. Unknown keys and
/// missing required keys (m, d, L, alpha, T_grid for rates and lowerbound)
/// are errors.
RunConfig apply_config(const std::string& subcommand, const std::map<std::string, std::string>& kv);

RunConfig parse_config(const std::string& path, const std::string& subcommand);

}  // namespace priorest
