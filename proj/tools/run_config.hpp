#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transition_lens/classify.hpp"
#include "transition_lens/ingest.hpp"
#include "transition_lens/robust_fit.hpp"
#include "transition_lens/scenario.hpp"
#include "transition_lens/synth.hpp"

namespace tlens::cli {

struct InputPaths {
  std::filesystem::path transactions;
  std::filesystem::path firms;
  std::filesystem::path prices;
  std::filesystem::path fuel_prices;
  std::filesystem::path grid_mix;
  std::filesystem::path pv_inputs;  // optional; the pv stage is skipped by `all` when empty
};

struct RunConfig {
  InputPaths inputs;
  YearWindow window;
  std::array<std::vector<std::string>, 3> providers;
  FilterSettings filters;
  HuberOptions huber;
  LogitSettings logit;
  int max_tier = 3;
  int horizon = 2050;
  YearWindow grid_fit_years;
  MatchSettings match;
  bool reanchor = true;
  std::vector<ScenarioKind> kinds{kScenarioKinds.begin(), kScenarioKinds.end()};
  std::string runs = "all";
  std::filesystem::path out = "out";
  unsigned threads = 0;
  std::uint64_t seed = 42;
  double pv_tolerance = 0.005;
  synth::SynthConfig synth;

  // Which source supplied each overridable setting: default, file or flag.
  std::map<std::string, std::string> sources;
};

struct FlagOverrides {
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scenario_kind;
  std::optional<std::string> runs;
};

/// Defaults, then `config_path` (when given), then flags. Relative paths in
/// the file resolve against the file's directory. Throws ConfigError for
/// malformed settings and InputError for referenced files that do not exist.
RunConfig load_config(const std::optional<std::filesystem::path>& config_path,
                      const FlagOverrides& flags);

nlohmann::json to_json(const RunConfig& config);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace tlens::cli
