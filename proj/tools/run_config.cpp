#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace tlens::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void take(const json& obj, const char* key, T& target, RunConfig& cfg, const std::string& source) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
  cfg.sources[key] = source;
}

YearWindow window_from(const json& j, const std::string& where) {
  check_keys(j, where, {"first", "last"});
  YearWindow w{j.at("first").get<int>(), j.at("last").get<int>()};
  if (w.empty()) throw ConfigError(where + ": window is empty");
  return w;
}

std::vector<ScenarioKind> parse_kinds(const std::string& text) {
  if (text == "all") return {kScenarioKinds.begin(), kScenarioKinds.end()};
  std::vector<ScenarioKind> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      out.push_back(parse_scenario_kind(item));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void load_synth(const json& j, synth::SynthConfig& s) {
  check_keys(j, "synth",
             {"firms", "window", "sectors", "providers", "annual_reporter_fraction",
              "linear_fraction", "e0_min", "e0_max", "trend_mean", "trend_sd", "rate_mean",
              "rate_sd", "noise_sd", "volume_sd", "outlier_fraction", "outlier_scale", "log_revenue_mean",
              "log_revenue_sd", "log_kwh_mean", "log_kwh_sd", "network_degree", "decoy_fraction",
              "diesel_weight"});
  auto num = [&](const char* key, auto& v) {
    if (j.contains(key)) v = j.at(key).get<std::remove_reference_t<decltype(v)>>();
  };
  num("firms", s.firms);
  if (j.contains("window")) s.window = window_from(j.at("window"), "synth.window");
  if (j.contains("sectors")) {
    s.sectors.clear();
    for (const auto& [code, w] : j.at("sectors").items()) s.sectors.push_back({code, w.get<double>()});
  }
  if (j.contains("providers")) {
    const auto& p = j.at("providers");
    check_keys(p, "synth.providers", {"electricity", "gas", "oil"});
    for (auto c : kCarriers) {
      const std::string name(to_string(c));
      if (p.contains(name)) s.providers[index(c)] = p.at(name).get<std::size_t>();
    }
  }
  num("annual_reporter_fraction", s.annual_reporter_fraction);
  num("linear_fraction", s.linear_fraction);
  num("e0_min", s.e0_min);
  num("e0_max", s.e0_max);
  num("trend_mean", s.trend_mean);
  num("trend_sd", s.trend_sd);
  num("rate_mean", s.rate_mean);
  num("rate_sd", s.rate_sd);
  num("noise_sd", s.noise_sd);
  num("volume_sd", s.volume_sd);
  num("outlier_fraction", s.outlier_fraction);
  num("outlier_scale", s.outlier_scale);
  num("log_revenue_mean", s.log_revenue_mean);
  num("log_revenue_sd", s.log_revenue_sd);
  num("log_kwh_mean", s.log_kwh_mean);
  num("log_kwh_sd", s.log_kwh_sd);
  num("network_degree", s.network_degree);
  num("decoy_fraction", s.decoy_fraction);
  num("diesel_weight", s.diesel_weight);
}

json synth_json(const synth::SynthConfig& s) {
  json sectors = json::object();
  for (const auto& w : s.sectors) sectors[w.nace4] = w.weight;
  return {
      {"firms", s.firms},
      {"window", {{"first", s.window.first}, {"last", s.window.last}}},
      {"sectors", sectors},
      {"providers",
       {{"electricity", s.providers[0]}, {"gas", s.providers[1]}, {"oil", s.providers[2]}}},
      {"annual_reporter_fraction", s.annual_reporter_fraction},
      {"linear_fraction", s.linear_fraction},
      {"e0_min", s.e0_min},
      {"e0_max", s.e0_max},
      {"trend_mean", s.trend_mean},
      {"trend_sd", s.trend_sd},
      {"rate_mean", s.rate_mean},
      {"rate_sd", s.rate_sd},
      {"noise_sd", s.noise_sd},
      {"volume_sd", s.volume_sd},
      {"outlier_fraction", s.outlier_fraction},
      {"outlier_scale", s.outlier_scale},
      {"log_revenue_mean", s.log_revenue_mean},
      {"log_revenue_sd", s.log_revenue_sd},
      {"log_kwh_mean", s.log_kwh_mean},
      {"log_kwh_sd", s.log_kwh_sd},
      {"network_degree", s.network_degree},
      {"decoy_fraction", s.decoy_fraction},
      {"diesel_weight", s.diesel_weight},
  };
}

}  // namespace

RunConfig load_config(const std::optional<fs::path>& config_path, const FlagOverrides& flags) {
  RunConfig cfg;
  const auto defaults = ProviderLists::defaults();
  for (auto c : kCarriers)
    cfg.providers[index(c)].assign(defaults.codes(c).begin(), defaults.codes(c).end());
  for (const char* key : {"out", "threads", "seed", "scenario_kinds", "runs"}) cfg.sources[key] = "default";

  fs::path base = fs::current_path();
  json j = json::object();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw InputError("cannot open config file " + config_path->string());
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(config_path->string() + ": " + e.what());
    }
    base = fs::absolute(*config_path).parent_path();
  }
  check_keys(j, "config",
             {"inputs", "window", "providers", "filters", "huber", "logit", "network", "scenario",
              "pv", "out", "threads", "seed", "synth"});

  auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : (base / p).lexically_normal(); };
  cfg.inputs = {resolve("transactions.csv"), resolve("firms.csv"),    resolve("prices.csv"),
                resolve("fuel_prices.csv"),  resolve("grid_mix.csv"), {}};

  std::vector<fs::path> referenced;
  if (j.contains("inputs")) {
    const auto& in = j.at("inputs");
    check_keys(in, "inputs",
               {"transactions", "firms", "prices", "fuel_prices", "grid_mix", "pv_inputs"});
    const std::pair<const char*, fs::path*> slots[] = {
        {"transactions", &cfg.inputs.transactions}, {"firms", &cfg.inputs.firms},
        {"prices", &cfg.inputs.prices},             {"fuel_prices", &cfg.inputs.fuel_prices},
        {"grid_mix", &cfg.inputs.grid_mix},         {"pv_inputs", &cfg.inputs.pv_inputs}};
    for (const auto& [key, slot] : slots)
      if (in.contains(key)) {
        *slot = resolve(in.at(key).get<std::string>());
        referenced.push_back(*slot);
      }
  }

  try {
    if (j.contains("window")) cfg.window = window_from(j.at("window"), "window");
    cfg.filters.window = cfg.window;
    cfg.grid_fit_years = cfg.window;

    if (j.contains("providers")) {
      const auto& p = j.at("providers");
      check_keys(p, "providers", {"electricity", "gas", "oil"});
      for (auto c : kCarriers) {
        const std::string name(to_string(c));
        if (p.contains(name)) cfg.providers[index(c)] = p.at(name).get<std::vector<std::string>>();
      }
    }
    if (j.contains("filters")) {
      const auto& f = j.at("filters");
      check_keys(f, "filters", {"excluded_sections", "excluded_codes", "outlier_ratio"});
      if (f.contains("excluded_sections")) {
        cfg.filters.excluded_sections.clear();
        for (const auto& s : f.at("excluded_sections").get<std::vector<std::string>>()) {
          if (s.size() != 1) throw ConfigError("filters.excluded_sections: '" + s + "' is not a section letter");
          cfg.filters.excluded_sections.insert(s[0]);
        }
      }
      if (f.contains("excluded_codes")) {
        cfg.filters.excluded_codes.clear();
        for (const auto& s : f.at("excluded_codes").get<std::vector<std::string>>())
          cfg.filters.excluded_codes.insert(NaceCode::parse(s).dotted());
      }
      if (f.contains("outlier_ratio")) cfg.filters.outlier_ratio = f.at("outlier_ratio").get<double>();
    }
    if (j.contains("huber")) {
      const auto& h = j.at("huber");
      check_keys(h, "huber", {"k", "tolerance", "max_iterations", "mad_consistency"});
      cfg.huber.k = h.value("k", cfg.huber.k);
      cfg.huber.tolerance = h.value("tolerance", cfg.huber.tolerance);
      cfg.huber.max_iterations = h.value("max_iterations", cfg.huber.max_iterations);
      cfg.huber.mad_consistency = h.value("mad_consistency", cfg.huber.mad_consistency);
    }
    if (!(cfg.huber.k > 0.0)) throw ConfigError("huber.k must be positive");
    if (j.contains("logit")) {
      const auto& l = j.at("logit");
      check_keys(l, "logit", {"min_observations", "z", "tolerance", "max_iterations"});
      cfg.logit.min_observations = l.value("min_observations", cfg.logit.min_observations);
      cfg.logit.z = l.value("z", cfg.logit.z);
      cfg.logit.solver.tolerance = l.value("tolerance", cfg.logit.solver.tolerance);
      cfg.logit.solver.max_iterations = l.value("max_iterations", cfg.logit.solver.max_iterations);
    }
    if (j.contains("network")) {
      const auto& n = j.at("network");
      check_keys(n, "network", {"max_tier"});
      cfg.max_tier = n.value("max_tier", cfg.max_tier);
      if (cfg.max_tier < 1) throw ConfigError("network.max_tier must be >= 1");
    }
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      check_keys(s, "scenario",
                 {"horizon", "kinds", "runs", "reanchor", "grid_fit_years", "revenue_years",
                  "employee_years"});
      cfg.horizon = s.value("horizon", cfg.horizon);
      if (s.contains("kinds")) {
        cfg.kinds.clear();
        for (const auto& k : s.at("kinds").get<std::vector<std::string>>())
          for (auto kind : parse_kinds(k)) cfg.kinds.push_back(kind);
        cfg.sources["scenario_kinds"] = "file";
      }
      take(s, "runs", cfg.runs, cfg, "file");
      cfg.reanchor = s.value("reanchor", cfg.reanchor);
      if (s.contains("grid_fit_years"))
        cfg.grid_fit_years = window_from(s.at("grid_fit_years"), "scenario.grid_fit_years");
      if (s.contains("revenue_years"))
        cfg.match.revenue_years = window_from(s.at("revenue_years"), "scenario.revenue_years");
      if (s.contains("employee_years"))
        cfg.match.employee_years = window_from(s.at("employee_years"), "scenario.employee_years");
    }
    if (cfg.horizon <= cfg.window.last) throw ConfigError("scenario.horizon must follow the window");
    if (j.contains("pv")) {
      const auto& p = j.at("pv");
      check_keys(p, "pv", {"tolerance"});
      cfg.pv_tolerance = p.value("tolerance", cfg.pv_tolerance);
    }
    if (j.contains("out")) {
      cfg.out = resolve(j.at("out").get<std::string>());
      cfg.sources["out"] = "file";
    }
    take(j, "threads", cfg.threads, cfg, "file");
    take(j, "seed", cfg.seed, cfg, "file");
    if (j.contains("synth")) load_synth(j.at("synth"), cfg.synth);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (flags.out) {
    cfg.out = fs::absolute(*flags.out).lexically_normal();
    cfg.sources["out"] = "flag";
  }
  if (flags.threads) {
    cfg.threads = *flags.threads;
    cfg.sources["threads"] = "flag";
  }
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.sources["seed"] = "flag";
  }
  if (flags.scenario_kind) {
    cfg.kinds = parse_kinds(*flags.scenario_kind);
    cfg.sources["scenario_kinds"] = "flag";
  }
  if (flags.runs) {
    cfg.runs = *flags.runs;
    cfg.sources["runs"] = "flag";
  }
  if (cfg.out.is_relative()) cfg.out = (base / cfg.out).lexically_normal();
  cfg.synth.seed = cfg.seed;

  try {
    parse_run_set(cfg.runs, cfg.window);
  } catch (const Error& e) {
    throw ConfigError(std::string("runs: ") + e.what());
  }
  for (const auto& p : referenced)
    if (!fs::exists(p)) throw InputError("missing file: " + p.string());
  return cfg;
}

json to_json(const RunConfig& c) {
  json kinds = json::array();
  for (auto k : c.kinds) kinds.push_back(std::string(to_string(k)));
  json sections = json::array();
  for (char s : c.filters.excluded_sections) sections.push_back(std::string(1, s));
  return {
      {"inputs",
       {{"transactions", c.inputs.transactions.string()},
        {"firms", c.inputs.firms.string()},
        {"prices", c.inputs.prices.string()},
        {"fuel_prices", c.inputs.fuel_prices.string()},
        {"grid_mix", c.inputs.grid_mix.string()},
        {"pv_inputs", c.inputs.pv_inputs.string()}}},
      {"window", {{"first", c.window.first}, {"last", c.window.last}}},
      {"providers",
       {{"electricity", c.providers[0]}, {"gas", c.providers[1]}, {"oil", c.providers[2]}}},
      {"filters",
       {{"excluded_sections", sections},
        {"excluded_codes", c.filters.excluded_codes},
        {"outlier_ratio", c.filters.outlier_ratio}}},
      {"huber",
       {{"k", c.huber.k},
        {"tolerance", c.huber.tolerance},
        {"max_iterations", c.huber.max_iterations},
        {"mad_consistency", c.huber.mad_consistency}}},
      {"logit",
       {{"min_observations", c.logit.min_observations},
        {"z", c.logit.z},
        {"tolerance", c.logit.solver.tolerance},
        {"max_iterations", c.logit.solver.max_iterations}}},
      {"network", {{"max_tier", c.max_tier}}},
      {"scenario",
       {{"horizon", c.horizon},
        {"kinds", kinds},
        {"runs", c.runs},
        {"reanchor", c.reanchor},
        {"grid_fit_years", {{"first", c.grid_fit_years.first}, {"last", c.grid_fit_years.last}}},
        {"revenue_years",
         {{"first", c.match.revenue_years.first}, {"last", c.match.revenue_years.last}}},
        {"employee_years",
         {{"first", c.match.employee_years.first}, {"last", c.match.employee_years.last}}}}},
      {"pv", {{"tolerance", c.pv_tolerance}}},
      {"out", c.out.string()},
      {"threads", c.threads},
      {"seed", c.seed},
      {"synth", synth_json(c.synth)},
  };
}

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tlens::cli
