#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stages.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tlens;
using namespace tlens::cli;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("transition_lens");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("TRANSITION_LENS_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept the names it knows.
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring TRANSITION_LENS_LOG={}", env);
  }
}

void write_error_report(const fs::path& out, int code, const std::string& kind,
                        const std::exception& e, nlohmann::json extra) {
  extra["exit_code"] = code;
  extra["error"] = kind;
  extra["message"] = e.what();
  std::cerr << extra.dump() << '\n';
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) std::ofstream(out / "error.json") << extra.dump(2) << '\n';
}

int run_guarded(const fs::path& out, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const SchemaError& e) {
    write_error_report(out, kExitInput, "schema", e, {{"file", e.file()}, {"column", e.column()}});
    return kExitInput;
  } catch (const MissingFileError& e) {
    write_error_report(out, kExitInput, "missing-file", e, {{"file", e.path().string()}});
    return kExitInput;
  } catch (const InputError& e) {
    write_error_report(out, kExitInput, "input", e, nlohmann::json::object());
    return kExitInput;
  } catch (const ConfigError& e) {
    write_error_report(out, kExitInput, "config", e, nlohmann::json::object());
    return kExitInput;
  } catch (const NumericalError& e) {
    write_error_report(out, kExitNumerical, "numerical", e,
                       {{"module", e.module()}, {"context", e.context()}});
    return kExitNumerical;
  } catch (const FitError& e) {
    write_error_report(out, kExitNumerical, "numerical", e, {{"module", "metrics"}});
    return kExitNumerical;
  } catch (const std::exception& e) {
    write_error_report(out, kExitFailure, "internal", e, nlohmann::json::object());
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Firm-level energy transition analysis from supply-network transactions"};
  app.require_subcommand(1, 1);

  std::optional<std::string> config_path;
  FlagOverrides flags;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--threads", flags.threads, "Worker threads (0 = hardware concurrency)");
  app.add_option("--seed", flags.seed, "Seed for synth");
  app.add_option("--scenario-kind", flags.scenario_kind,
                 "bau_linear, bau_exponential, transition_linear, transition_exponential, "
                 "a comma list, or all");
  app.add_option("--runs", flags.runs, "Uncertainty run set: all, main, N, or main,2021,...");

  using Stage = StageResult (*)(const RunConfig&);
  const std::vector<std::pair<std::string, Stage>> stages{
      {"ingest", run_ingest},     {"fit", run_fit}, {"classify", run_classify},
      {"scenario", run_scenario}, {"pv", run_pv},   {"synth", run_synth},
  };
  const std::map<std::string, std::string> help{
      {"ingest", "Aggregate transactions, convert to kWh and build the firm sample"},
      {"fit", "Low-carbon shares and robust trend fits per firm"},
      {"classify", "Sector logistic regressions and partner correlations"},
      {"scenario", "Aggregate forecasts with uncertainty envelopes"},
      {"pv", "Behind-the-meter PV self-consumption estimates"},
      {"synth", "Generate a synthetic dataset with ground truth"},
      {"all", "ingest, fit, classify, scenario and pv in sequence"},
  };
  for (const auto& name : {"ingest", "fit", "classify", "scenario", "pv", "synth", "all"})
    app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  fs::path out = flags.out ? fs::path(*flags.out) : fs::path("out");
  RunConfig cfg;
  int status = run_guarded(out, [&] {
    std::optional<fs::path> path;
    if (config_path) path = fs::path(*config_path);
    cfg = load_config(path, flags);
  });
  if (status != kExitOk) return status;
  out = cfg.out;

  std::vector<std::pair<std::string, Stage>> plan;
  if (command == "all") {
    for (const auto& s : stages)
      if (s.first != "synth" && (s.first != "pv" || !cfg.inputs.pv_inputs.empty())) plan.push_back(s);
  } else {
    for (const auto& s : stages)
      if (s.first == command) plan.push_back(s);
  }

  return run_guarded(out, [&] {
    std::error_code ec;
    fs::remove(out / "error.json", ec);
    for (const auto& [name, fn] : plan) {
      spdlog::info("stage {} -> {}", name, out.string());
      const auto start = std::chrono::steady_clock::now();
      const auto result = fn(cfg);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      record_manifest(cfg, name, result, seconds);
      if (result.diag.warning_count() > 0)
        spdlog::warn("stage {}: {} warnings", name, result.diag.warning_count());
    }
  });
}
