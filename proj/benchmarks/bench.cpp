#include <benchmark/benchmark.h>

#include <random>

#include "transition_lens/ingest.hpp"
#include "transition_lens/metrics.hpp"
#include "transition_lens/network.hpp"
#include "transition_lens/pricing.hpp"
#include "transition_lens/robust_fit.hpp"
#include "transition_lens/scenario.hpp"
#include "transition_lens/synth.hpp"

using namespace tlens;

namespace {

void BM_HuberLinear(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0, 0.01);
  YearSeries s;
  for (int y = 2020; y <= 2024; ++y) s.emplace(y, 0.4 - 0.01 * (y - 2020) + noise(rng));
  s[2022] += 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(huber_fit_linear(s));
}
BENCHMARK(BM_HuberLinear);

void BM_ToKwh(benchmark::State& state) {
  const PriceTable t(Carrier::Electricity, {2020, Semester::H1},
                     {{0, 95}, {20000, 80}, {500000, 70}, {2000000, 62}, {20000000, 55}});
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> spend(14, 2);
  std::vector<double> x(1024);
  for (auto& v : x) v = spend(rng);
  for (auto _ : state)
    for (double v : x) benchmark::DoNotOptimize(t.to_kwh(v));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_ToKwh);

struct Prepared {
  synth::SynthData data;
  ScenarioInputs inputs;
};

const Prepared& prepared() {
  static const Prepared p = [] {
    synth::SynthConfig cfg;
    cfg.firms = 2000;
    Prepared out{synth::generate(cfg), {}};
    Diagnostics d;
    const auto lists = ProviderLists::defaults();
    const auto purchases = aggregate_purchases(out.data.transactions, out.data.registry, lists, d);
    const auto kwh = annualize(purchases, out.data.registry, out.data.prices, cfg.window, d);
    const auto fits = fit_all(low_carbon_shares(kwh, out.data.grid_mix, d), {}, 0, d);
    out.inputs = {build_scenario_firms(fits, kwh, out.data.registry, cfg.window, {}, d),
                  forecast_grid_mix(out.data.grid_mix, cfg.window, 2050), cfg.window, 2050, true};
    return out;
  }();
  return p;
}

void BM_TransitionScenario(benchmark::State& state) {
  const auto& p = prepared();
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(ScenarioKind::TransitionLinear, p.inputs));
}
BENCHMARK(BM_TransitionScenario)->Unit(benchmark::kMillisecond);

void BM_TierBfs(benchmark::State& state) {
  const auto& p = prepared();
  std::set<FirmId> members;
  for (const auto& f : p.data.truth.firms) members.insert(f.id);
  const auto net = SupplyNetwork::build(p.data.transactions, members, {2020, 2024});
  const int tier = static_cast<int>(state.range(0));
  std::size_t node = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.tier(node, tier, PartnerSide::Suppliers));
    node = (node + 1) % net.size();
  }
}
BENCHMARK(BM_TierBfs)->Arg(1)->Arg(2)->Arg(3);

}  // namespace
BENCHMARK_MAIN();
