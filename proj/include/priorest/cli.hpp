#pragma once

#include "priorest/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace priorest {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutEnv = "PRIOREST_OUT";

struct RunOptions {
  std::string subcommand;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::filesystem::path out = "priorest-out";
  bool exact_rational = false;
};

/// Resolves the config, runs the subcommand and writes its CSVs, summary.txt,
/// config.txt, a plot script and manifest.txt under `out`.
/// Returns 0 on success, 1 on a validation error, 2 on a budget error.
int dispatch(const RunOptions& options, std::ostream& log, std::ostream& err);

/// argv front end: parses flags, applies the output-directory environment
/// variable and calls dispatch. Usage problems return 1 with the usage text.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

std::string usage_text();

/// FNV-1a of the text, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace priorest
