#include "stages.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "transition_lens/classify.hpp"
#include "transition_lens/csv.hpp"
#include "transition_lens/metrics.hpp"
#include "transition_lens/network.hpp"
#include "transition_lens/pricing.hpp"
#include "transition_lens/pv.hpp"
#include "transition_lens/scenario.hpp"
#include "transition_lens/synth.hpp"

namespace tlens::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& require(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw MissingFileError(p);
  return p;
}

fs::path artifact(const RunConfig& cfg, const std::string& name) { return cfg.out / name; }

fs::path prior_artifact(const RunConfig& cfg, const std::string& name) {
  return require(artifact(cfg, name));
}

ProviderLists provider_lists(const RunConfig& cfg) {
  try {
    return ProviderLists::from_codes(cfg.providers);
  } catch (const InputError& e) {
    throw ConfigError(std::string("providers: ") + e.what());
  }
}

}  // namespace

StageResult run_ingest(const RunConfig& cfg) {
  StageResult r;
  const auto lists = provider_lists(cfg);
  const auto registry = FirmRegistry::read(require(cfg.inputs.firms), r.diag);
  const auto records = read_transactions(require(cfg.inputs.transactions), r.diag);
  const auto prices = PriceBook::read(require(cfg.inputs.prices), require(cfg.inputs.fuel_prices));
  spdlog::info("ingest: {} firms, {} transactions", registry.size(), records.size());

  const auto purchases = aggregate_purchases(records, registry, lists, r.diag);
  const auto kwh = annualize(purchases, registry, prices, cfg.window, r.diag);
  const auto sample = apply_sample_filters(purchases, registry, kwh, cfg.filters, lists);
  spdlog::info("ingest: {} firms included, {} excluded", sample.included.size(),
               sample.excluded.size());
  for (const auto& [id, reason] : sample.excluded) r.diag.count("excluded:" + std::string(to_string(reason)));

  fs::create_directories(cfg.out);
  sample.write_exclusions(artifact(cfg, "exclusions.csv"));
  kwh.restricted(sample.included).write(artifact(cfg, "energy.csv"));
  r.outputs = {"exclusions.csv", "energy.csv"};
  return r;
}

StageResult run_fit(const RunConfig& cfg) {
  StageResult r;
  const auto ledger = EnergyLedger::read(prior_artifact(cfg, "energy.csv"));
  const auto mix = GridMixSeries::read(require(cfg.inputs.grid_mix));
  const auto shares = low_carbon_shares(ledger, mix, r.diag);
  const auto fits = fit_all(shares, cfg.huber, cfg.threads, r.diag);
  std::size_t transitioning = 0;
  for (const auto& f : fits)
    if (transition_status(f) == TransitionStatus::Transitioning) ++transitioning;
  spdlog::info("fit: {} firms, {} transitioning", fits.size(), transitioning);
  r.diag.count("firms", fits.size());
  r.diag.count("transitioning", transitioning);

  write_shares(artifact(cfg, "shares.csv"), shares);
  write_fits(artifact(cfg, "fits.csv"), fits);
  r.outputs = {"shares.csv", "fits.csv"};
  return r;
}

StageResult run_classify(const RunConfig& cfg) {
  StageResult r;
  const auto fits = read_fits(prior_artifact(cfg, "fits.csv"));
  const auto ledger = EnergyLedger::read(prior_artifact(cfg, "energy.csv"));
  const auto registry = FirmRegistry::read(require(cfg.inputs.firms), r.diag);

  const auto features = prepare_features(fits, ledger, registry, cfg.window, r.diag);
  const auto result = classify_sectors(features, cfg.logit, cfg.threads, r.diag);
  spdlog::info("classify: {} sectors fitted, {} skipped", result.sectors.size(),
               result.skipped.size());
  write_features(artifact(cfg, "features.csv"), features);
  write_logit_results(artifact(cfg, "logit_results.csv"), result);

  std::set<FirmId> members;
  for (const auto& f : fits) members.insert(f.id);
  const auto records = read_transactions(require(cfg.inputs.transactions), r.diag);
  const auto network = SupplyNetwork::build(records, members, cfg.window);
  std::vector<PartnerCorrelation> rows;
  for (int tier = 1; tier <= cfg.max_tier; ++tier)
    for (auto side : {PartnerSide::Suppliers, PartnerSide::Customers})
      rows.push_back(partner_trend_correlation(network, fits, tier, side));
  write_partner_correlations(artifact(cfg, "partner_correlations.csv"), rows);

  r.outputs = {"features.csv", "logit_results.csv", "partner_correlations.csv"};
  return r;
}

StageResult run_scenario(const RunConfig& cfg) {
  StageResult r;
  const auto fits = read_fits(prior_artifact(cfg, "fits.csv"));
  const auto ledger = EnergyLedger::read(prior_artifact(cfg, "energy.csv"));
  const auto registry = FirmRegistry::read(require(cfg.inputs.firms), r.diag);
  const auto observed = GridMixSeries::read(require(cfg.inputs.grid_mix));

  ScenarioInputs inputs;
  inputs.firms = build_scenario_firms(fits, ledger, registry, cfg.window, cfg.match, r.diag);
  inputs.mix = forecast_grid_mix(observed, cfg.grid_fit_years, cfg.horizon);
  inputs.window = cfg.window;
  inputs.horizon = cfg.horizon;
  inputs.reanchor = cfg.reanchor;
  inputs.mix.write(artifact(cfg, "grid_mix_forecast.csv"));
  r.outputs.push_back("grid_mix_forecast.csv");

  const auto runs = parse_run_set(cfg.runs, cfg.window);
  for (auto kind : cfg.kinds) {
    const std::string name(to_string(kind));
    const auto scenario = tlens::run_scenario(kind, inputs);
    const auto envelope =
        uncertainty_envelope(kind, inputs, runs, cfg.huber, cfg.threads, r.diag);
    for (const auto& s : envelope.skipped) r.diag.warn("run-skipped", name + ": " + s);
    if (scenario.dropped > 0) r.diag.count("scenario-dropped:" + name, scenario.dropped);
    spdlog::info("scenario {}: l({}) = {:.4f}", name, cfg.horizon, scenario.at(cfg.horizon).l);

    write_scenario(artifact(cfg, "scenario_" + name + ".csv"), scenario, &envelope, inputs.mix);
    r.outputs.push_back("scenario_" + name + ".csv");
    if (is_transition(kind)) {
      write_matches(artifact(cfg, "matches_" + name + ".csv"), scenario.matches);
      r.outputs.push_back("matches_" + name + ".csv");
    }
  }
  return r;
}

StageResult run_pv(const RunConfig& cfg) {
  StageResult r;
  if (cfg.inputs.pv_inputs.empty()) throw ConfigError("inputs.pv_inputs is not set");
  const auto records = read_pv_inputs(require(cfg.inputs.pv_inputs));
  std::vector<PvEstimate> rows;
  for (const auto& rec : records) {
    rows.push_back(estimate_pv(rec, cfg.pv_tolerance));
    const auto& e = rows.back();
    const auto year = std::to_string(e.year);
    if (e.flag_g_scte) r.diag.warn("pv-reference-mismatch", year + ": g_scte");
    if (e.flag_g_hmke_com) r.diag.warn("pv-reference-mismatch", year + ": g_hmke_com");
    if (e.flag_s_com) r.diag.warn("pv-reference-mismatch", year + ": s_com");
  }
  fs::create_directories(cfg.out);
  write_pv_estimates(artifact(cfg, "pv_estimates.csv"), rows);
  r.outputs = {"pv_estimates.csv"};
  return r;
}

StageResult run_synth(const RunConfig& cfg) {
  StageResult r;
  const auto data = synth::generate(cfg.synth);
  synth::write(data, cfg.out);
  spdlog::info("synth: {} firms, {} transactions", cfg.synth.firms, data.transactions.size());

  // A ready-to-run configuration pointing at the generated inputs.
  auto c = to_json(cfg);
  c["inputs"] = {{"transactions", "transactions.csv"}, {"firms", "firms.csv"},
                 {"prices", "prices.csv"},             {"fuel_prices", "fuel_prices.csv"},
                 {"grid_mix", "grid_mix.csv"}};
  c["window"] = {{"first", cfg.synth.window.first}, {"last", cfg.synth.window.last}};
  c["out"] = "results";
  c.erase("threads");
  auto& scen = c["scenario"];
  scen["grid_fit_years"] = c["window"];
  std::ofstream(artifact(cfg, "config.json")) << c.dump(2) << '\n';

  r.outputs = {"transactions.csv", "firms.csv",        "prices.csv",  "fuel_prices.csv",
               "grid_mix.csv",     "ground_truth.csv", "config.json"};
  return r;
}

void record_manifest(const RunConfig& cfg, const std::string& stage, const StageResult& result,
                     double seconds) {
  fs::create_directories(cfg.out);
  const auto path = artifact(cfg, "manifest.json");
  json manifest = {{"tool", "transition_lens"}, {"stages", json::object()}};
  if (fs::exists(path)) {
    std::ifstream in(path);
    manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) manifest = {{"stages", json::object()}};
  }
  const auto config = to_json(cfg);
  json sources = json::object();
  for (const auto& [k, v] : cfg.sources) sources[k] = v;
  manifest["stages"][stage] = {
      {"config_hash", config_hash(config)},
      {"config", config},
      {"sources", sources},
      {"seconds", seconds},
      {"warnings", result.diag.warning_count()},
      {"counters", result.diag.counters()},
      {"messages", result.diag.messages()},
      {"outputs", result.outputs},
  };
  std::ofstream(path) << manifest.dump(2) << '\n';
}

}  // namespace tlens::cli
