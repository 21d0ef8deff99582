#include <doctest.h>

#include <random>

#include "support.hpp"
#include "transition_lens/csv.hpp"
#include "transition_lens/scenario.hpp"

using namespace tlens;

namespace {

GridMixSeries measured_mix() {
  GridMixSeries m;
  const double u[] = {0.617984, 0.634349, 0.655953, 0.711712, 0.737821};
  for (int i = 0; i < 5; ++i) m.set(2020 + i, u[i]);
  return m;
}

GridMixSeries paper_forecast() { return forecast_grid_mix(measured_mix(), {2020, 2024}, 2050); }

LineFit line(double intercept, double slope, int base = 2020) {
  return LineFit{intercept, slope, base, true, 1, 0, 0};
}

// Firm whose observed kWh follow its linear electrification path exactly.
ScenarioFirm linear_firm(const FirmId& id, const std::string& nace, double t_bar, double e0,
                         double slope, double log_rev = 10, double log_emp = 3) {
  ScenarioFirm f{id, NaceCode::parse(nace), t_bar, log_rev, log_emp, {}, line(e0, slope), std::nullopt};
  for (int y = 2020; y <= 2024; ++y) f.observed[y] = {t_bar * (e0 + slope * (y - 2020)), t_bar};
  YearSeries logs;
  for (const auto& [y, et] : f.observed) logs.emplace(y, std::log(et.first / et.second));
  f.elec_exponential = ols_fit(logs);
  return f;
}

ScenarioInputs inputs_of(std::vector<ScenarioFirm> firms, bool reanchor = true) {
  return ScenarioInputs{std::move(firms), paper_forecast(), {2020, 2024}, 2050, reanchor};
}

}  // namespace

TEST_CASE("grid mix forecast reproduces the published path") {
  const auto m = paper_forecast();
  const std::pair<int, double> published[] = {{2025, 0.766675}, {2026, 0.798378}, {2027, 0.830082},
                                              {2028, 0.861786}, {2029, 0.893489}, {2030, 0.925193},
                                              {2031, 0.956897}, {2032, 0.988600}};
  for (const auto& [y, u] : published) CHECK(std::abs(m.u(y) - u) <= 1e-4);
  for (int y = 2033; y <= 2050; ++y) CHECK(m.u(y) == 1.0);
  CHECK(m.u(2022) == 0.655953);
  CHECK(m.points().at(2022).provenance == MixProvenance::Measured);
  CHECK(m.points().at(2025).provenance == MixProvenance::Forecast);
}

TEST_CASE("grid mix forecast: constant, two-point and degenerate inputs") {
  GridMixSeries c;
  for (int y = 2020; y <= 2024; ++y) c.set(y, 0.4);
  const auto fc = forecast_grid_mix(c, {2020, 2024}, 2030);
  for (int y = 2025; y <= 2030; ++y) CHECK(fc.u(y) == doctest::Approx(0.4).epsilon(1e-14));

  GridMixSeries two;
  two.set(2020, 0.5);
  two.set(2021, 0.52);
  const auto ft = forecast_grid_mix(two, {2020, 2021}, 2030);
  for (int y = 2022; y <= 2030; ++y) CHECK(ft.u(y) == doctest::Approx(0.5 + 0.02 * (y - 2020)).epsilon(1e-13));

  GridMixSeries one;
  one.set(2020, 0.5);
  CHECK_THROWS_AS(forecast_grid_mix(one, {2020, 2024}, 2030), InputError);

  // A falling line clamps at 0.
  GridMixSeries down;
  down.set(2020, 0.2);
  down.set(2021, 0.1);
  CHECK(forecast_grid_mix(down, {2020, 2021}, 2030).u(2025) == 0.0);
}

TEST_CASE("forecast_firm: worked cases") {
  const auto mix = paper_forecast();
  const ElectrificationPath flat{TrendMode::Linear, 0.5, 0.0, 2020};
  for (const auto& [y, p] : forecast_firm(flat, mix, 2025, 2050)) {
    CHECK(p.l == 0.5 * mix.u(y));
    CHECK(p.ef == 0.5 * (1 - mix.u(y)));
    CHECK(p.ff == 0.5);
  }

  const ElectrificationPath fast{TrendMode::Exponential, std::log(0.5), 0.3, 2024};
  const auto sat = forecast_firm(fast, mix, 2025, 2050);
  CHECK(sat.at(2030).e == 1.0);
  CHECK(sat.at(2040).l == 1.0);
  CHECK(sat.at(2030).l == mix.u(2030));

  const ElectrificationPath falling{TrendMode::Linear, 0.1, -0.05, 2024};
  CHECK(forecast_firm(falling, mix, 2030, 2030).at(2030).e == 0.0);

  // Hand evaluation: e(2030) = 0.3 + 0.02 * 6 = 0.42; u(2030) = 0.925193.
  const ElectrificationPath hand{TrendMode::Linear, 0.3, 0.02, 2024};
  const auto h = forecast_firm(hand, mix, 2030, 2030).at(2030);
  CHECK(h.e == doctest::Approx(0.42).epsilon(1e-14));
  CHECK(std::abs(h.l - 0.38858106) < 1e-4 * 0.42 + 1e-12);
}

TEST_CASE("aggregate: worked examples and the kWh summation oracle") {
  const std::map<int, FirmPoint> one{{2030, {0.5, 0.3, 0.2, 0.5}}};
  const WeightedForecast a[] = {{100, &one}};
  const auto r = aggregate(a);
  CHECK(r[0].l == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r[0].ef == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r[0].ff == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r[0].f == doctest::Approx(0.7).epsilon(1e-15));

  const std::map<int, FirmPoint> p2{{2030, {0.2, 0.2, 0, 0.8}}}, p6{{2030, {0.6, 0.6, 0, 0.4}}};
  const WeightedForecast two[] = {{100, &p2}, {300, &p6}};
  CHECK(aggregate(two)[0].l == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(aggregate(std::span<const WeightedForecast>{}), InputError);
  const WeightedForecast zero[] = {{0, &p2}};
  CHECK_THROWS_AS(aggregate(zero), InputError);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1), w(1, 1e6);
  const auto mix = paper_forecast();
  std::vector<std::map<int, FirmPoint>> paths;
  std::vector<double> weights;
  for (int i = 0; i < 50; ++i) {
    paths.push_back(forecast_firm({TrendMode::Linear, u(rng), 0.05 * (u(rng) - 0.5), 2024}, mix, 2025, 2050));
    weights.push_back(w(rng));
  }
  std::vector<WeightedForecast> wf;
  for (int i = 0; i < 50; ++i) wf.push_back({weights[i], &paths[i]});
  for (const auto& p : aggregate(wf)) {
    double low_carbon_kwh = 0, fossil_kwh = 0, total = 0;
    for (int i = 0; i < 50; ++i) {
      const auto& fp = paths[i].at(p.year);
      low_carbon_kwh += weights[i] * fp.e * mix.u(p.year);
      fossil_kwh += weights[i] * (fp.ff + fp.e * (1 - mix.u(p.year)));
      total += weights[i];
    }
    CHECK(std::abs(p.l - low_carbon_kwh / total) < 1e-12);
    CHECK(std::abs(p.f - fossil_kwh / total) < 1e-12);
  }
}

TEST_CASE("match_donors: singleton, tie, fallback and none") {
  const std::vector<ScenarioFirm> pool{linear_firm("d1", "C10.1.1", 10, 0.3, 0.01, 50, 50)};
  const std::vector<ScenarioFirm> rec{linear_firm("r", "C10.1.1", 10, 0.3, -0.01, 0, 0)};
  const auto m = match_donors(rec, pool, TrendMode::Linear);
  CHECK(m.at("r").donor == "d1");
  CHECK(m.at("r").level == MatchLevel::Nace4);

  const std::vector<ScenarioFirm> tie{linear_firm("b", "C10.1.1", 10, 0.3, 0.01, 1, 0),
                                      linear_firm("a", "C10.1.1", 10, 0.3, 0.01, -1, 0)};
  CHECK(match_donors(rec, tie, TrendMode::Linear).at("r").donor == "a");

  const std::vector<ScenarioFirm> other{linear_firm("x", "C10.2.0", 10, 0.3, 0.01),
                                        linear_firm("y", "G47.1.1", 10, 0.3, 0.01, 0, 0)};
  const auto fb = match_donors(rec, other, TrendMode::Linear);
  CHECK(fb.at("r").donor == "x");
  CHECK(fb.at("r").level == MatchLevel::Nace2);

  const std::vector<ScenarioFirm> far{linear_firm("y", "G47.1.1", 10, 0.3, 0.01)};
  const auto none = match_donors(rec, far, TrendMode::Linear);
  CHECK(none.at("r").level == MatchLevel::None);
  CHECK(none.at("r").donor.empty());
}

TEST_CASE("match_donors: 30-firm sectors against an exhaustive scan") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  const char* codes[] = {"C10.1.1", "C10.1.2", "C11.0.1", "G47.1.1"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScenarioFirm> all;
    for (int i = 0; i < 30; ++i)
      all.push_back(linear_firm("f" + std::to_string(100 + i), codes[rng() % 4], 10, 0.4,
                                0.02 * (u(rng) - 0.6), std::round(8 * u(rng)), std::round(4 * u(rng))));
    std::vector<ScenarioFirm> pool, rec;
    for (const auto& f : all) (f.elec_linear->slope > 0 ? pool : rec).push_back(f);
    const auto got = match_donors(rec, pool, TrendMode::Linear);
    for (const auto& r : rec) {
      auto scan = [&](auto same) -> std::optional<std::pair<double, FirmId>> {
        std::optional<std::pair<double, FirmId>> best;
        for (const auto& d : pool) {
          if (!same(d)) continue;
          const double dist = std::hypot(d.log_revenue - r.log_revenue, d.log_employees - r.log_employees);
          const std::pair<double, FirmId> cand{dist, d.id};
          if (!best || cand < *best) best = cand;
        }
        return best;
      };
      auto expected = scan([&](const ScenarioFirm& d) { return d.nace.dotted() == r.nace.dotted(); });
      MatchLevel level = MatchLevel::Nace4;
      if (!expected) {
        expected = scan([&](const ScenarioFirm& d) { return d.nace.division() == r.nace.division(); });
        level = MatchLevel::Nace2;
      }
      const auto& m = got.at(r.id);
      if (!expected) {
        CHECK(m.level == MatchLevel::None);
        continue;
      }
      CHECK(m.level == level);
      CHECK(m.donor == expected->second);
      CHECK(m.distance == expected->first);
    }
  }
}

TEST_CASE("run_scenario: all-positive population makes transition equal BAU") {
  std::vector<ScenarioFirm> firms{linear_firm("a", "C10.1.1", 100, 0.3, 0.01),
                                  linear_firm("b", "C10.1.1", 50, 0.5, 0.02)};
  const auto in = inputs_of(firms);
  for (auto [bau, tr] : {std::pair{ScenarioKind::BauLinear, ScenarioKind::TransitionLinear},
                         std::pair{ScenarioKind::BauExponential, ScenarioKind::TransitionExponential}}) {
    const auto b = run_scenario(bau, in);
    const auto t = run_scenario(tr, in);
    REQUIRE(b.points.size() == t.points.size());
    for (std::size_t i = 0; i < b.points.size(); ++i) CHECK(b.points[i].l == t.points[i].l);
    CHECK(t.matches.empty());
  }
}

TEST_CASE("run_scenario: two-firm economy against a hand-computed trajectory") {
  // a: e = 0.4 + 0.01 (t - 2020), T = 100; b: e = 0.6 - 0.02 (t - 2020), T = 300.
  std::vector<ScenarioFirm> firms{linear_firm("a", "C10.1.1", 100, 0.4, 0.01),
                                  linear_firm("b", "C10.1.1", 300, 0.6, -0.02)};
  const auto in = inputs_of(firms);
  const auto& mix = in.mix;
  const auto bau = run_scenario(ScenarioKind::BauLinear, in);
  const auto tr = run_scenario(ScenarioKind::TransitionLinear, in);
  for (int y = 2020; y <= 2050; ++y) {
    const double ea = std::min(1.0, 0.4 + 0.01 * (y - 2020));
    const double eb = std::max(0.0, 0.6 - 0.02 * (y - 2020));
    // From 2024 b follows a's slope starting at its own 2024 level 0.52.
    const double eb_tr = y <= 2024 ? eb : std::min(1.0, 0.52 + 0.01 * (y - 2024));
    const double u = mix.u(y);
    CHECK(std::abs(bau.at(y).l - (100 * ea + 300 * eb) * u / 400) < 1e-12);
    CHECK(std::abs(tr.at(y).l - (100 * ea + 300 * eb_tr) * u / 400) < 1e-12);
    CHECK(bau.at(y).measured == (y <= 2024));
  }
  CHECK(std::abs(tr.at(2030).l - 0.56 * 0.925193) < 1e-4);
  CHECK(tr.matches.at("b").donor == "a");

  // Without re-anchoring b keeps its own intercept: e = 0.6 + 0.01 (t - 2020).
  const auto raw = run_scenario(ScenarioKind::TransitionLinear, inputs_of(firms, false));
  CHECK(std::abs(raw.at(2030).l - (100 * 0.5 + 300 * 0.7) * mix.u(2030) / 400) < 1e-12);
}

TEST_CASE("run_scenario: measured years come from observed kWh") {
  auto f = linear_firm("a", "C10.1.1", 100, 0.4, 0.01);
  f.observed[2022] = {80, 200};
  auto g = linear_firm("b", "C10.1.1", 300, 0.2, 0.0);
  const auto s = run_scenario(ScenarioKind::BauLinear, inputs_of({f, g}));
  CHECK(s.at(2022).l == doctest::Approx((80.0 + 60.0) * 0.655953 / 500).epsilon(1e-14));
  CHECK(s.at(2022).ff == doctest::Approx((500.0 - 140) / 500).epsilon(1e-14));

  ScenarioFirm nofit = f;
  nofit.id = "c";
  nofit.elec_linear.reset();
  const auto d = run_scenario(ScenarioKind::BauLinear, inputs_of({f, nofit}));
  CHECK(d.dropped == 1);
  CHECK_THROWS_AS(run_scenario(ScenarioKind::BauLinear, inputs_of({nofit})), InputError);
}

TEST_CASE("parse_run_set") {
  const YearWindow w{2020, 2024};
  CHECK(parse_run_set("all", w).size() == 6);
  CHECK(parse_run_set("main", w).size() == 1);
  const auto two = parse_run_set("2", w);
  REQUIRE(two.size() == 3);
  CHECK_FALSE(two[0].excluded_year.has_value());
  CHECK(*two[2].excluded_year == 2021);
  const auto list = parse_run_set("main,2021,2023", w);
  REQUIRE(list.size() == 3);
  CHECK(*list[1].excluded_year == 2021);
  CHECK(*list[2].excluded_year == 2023);
  CHECK_THROWS_AS(parse_run_set("2019", w), InputError);
  CHECK_THROWS_AS(parse_run_set("9", w), InputError);
  CHECK_THROWS(parse_run_set("x", w));
}

TEST_CASE("uncertainty envelope: exact lines give zero width") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ScenarioFirm> firms;
  for (int i = 0; i < 20; ++i)
    firms.push_back(linear_firm("f" + std::to_string(100 + i), i % 2 ? "C10.1.1" : "C10.1.2",
                                10 + 100 * u(rng), 0.2 + 0.5 * u(rng), 0.04 * (u(rng) - 0.5)));
  const auto in = inputs_of(firms);
  const auto runs = parse_run_set("all", in.window);
  Diagnostics d;
  for (auto kind : {ScenarioKind::BauLinear, ScenarioKind::TransitionLinear}) {
    const auto env = uncertainty_envelope(kind, in, runs, {}, 2, d);
    CHECK(env.runs.size() == 6);
    for (const auto& p : env.points) CHECK(p.max - p.min < 1e-12);
  }
}

namespace {

struct NoisyPopulation {
  std::vector<ScenarioFirm> noisy, clean;
};

NoisyPopulation noisy_population(int seed) {
  std::mt19937_64 rng(1000 + seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> noise(0, 0.01);
  NoisyPopulation p;
  for (int i = 0; i < 30; ++i) {
    const FirmId id = "f" + std::to_string(100 + i);
    const double t = 10 + 100 * u(rng), e0 = 0.2 + 0.5 * u(rng), s = 0.03 * (u(rng) - 0.3);
    auto c = linear_firm(id, "C10.1.1", t, e0, s);
    auto n = c;
    YearSeries e;
    for (auto& [y, et] : n.observed) {
      et.first = t * std::clamp(e0 + s * (y - 2020) + noise(rng), 0.01, 0.99);
      e.emplace(y, et.first / t);
    }
    n.elec_linear = huber_fit_linear(e);
    p.noisy.push_back(n);
    p.clean.push_back(c);
  }
  return p;
}

}  // namespace

TEST_CASE("uncertainty envelope: main run inside the envelope on noisy populations") {
  const auto mix = paper_forecast();
  for (int seed = 0; seed < 100; ++seed) {
    const auto pop = noisy_population(seed);
    ScenarioInputs in{pop.noisy, mix, {2020, 2024}, 2050, true};
    Diagnostics d;
    for (auto kind : kScenarioKinds) {
      if (mode_of(kind) == TrendMode::Exponential) continue;
      const auto env = uncertainty_envelope(kind, in, parse_run_set("all", in.window), {}, 1, d);
      for (const auto& p : env.points) {
        CHECK(p.min <= p.main);
        CHECK(p.main <= p.max);
      }
    }
  }
}

// Leave-one-out min/max over five points spans roughly one standard error of
// the slope, so coverage near 55-60% is expected rather than 90%.
TEST_CASE("uncertainty envelope: covers the noise-free trajectory in 90% of forecast years") {
  const auto mix = paper_forecast();
  int years = 0, covered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto pop = noisy_population(seed);
    ScenarioInputs in{pop.noisy, mix, {2020, 2024}, 2050, true};
    Diagnostics d;
    const auto env = uncertainty_envelope(ScenarioKind::BauLinear, in, parse_run_set("all", in.window), {}, 1, d);
    const auto truth = run_scenario(ScenarioKind::BauLinear, ScenarioInputs{pop.clean, mix, {2020, 2024}, 2050, true});
    for (const auto& p : env.points) {
      if (p.year <= 2024) continue;
      ++years;
      const double l = truth.at(p.year).l;
      if (p.min - 1e-12 <= l && l <= p.max + 1e-12) ++covered;
    }
  }
  MESSAGE("forecast-year coverage of the noise-free trajectory: " << covered << "/" << years);
  CHECK(covered >= 0.9 * years);
}

TEST_CASE("scenario and matches csv") {
  std::vector<ScenarioFirm> firms{linear_firm("a", "C10.1.1", 100, 0.4, 0.01),
                                  linear_firm("b", "C10.1.1", 300, 0.6, -0.02)};
  const auto in = inputs_of(firms);
  const auto s = run_scenario(ScenarioKind::TransitionLinear, in);
  test::TempDir dir("scen");
  write_scenario(dir / "s.csv", s, nullptr, in.mix);
  write_matches(dir / "m.csv", s.matches);
  const auto t = csv::Table::read(dir / "s.csv");
  const std::vector<std::string> cols{"year", "l", "e_f", "ff", "f", "l_min", "l_max"};
  for (std::size_t i = 0; i < cols.size(); ++i) CHECK(t.header()[i] == cols[i]);
  CHECK(t.rows() == 31);
  CHECK(t.number(30, 1) == s.at(2050).l);
  CHECK(t.cell(0, 8) == "measured");
  const auto m = csv::Table::read(dir / "m.csv");
  CHECK(m.cell(0, 0) == "b");
  CHECK(m.cell(0, 1) == "a");
  CHECK(m.cell(0, 2) == "nace4");
}

TEST_CASE("build_scenario_firms: matching coordinates and weights") {
  FirmRegistry reg;
  reg.add({"a", NaceCode::parse("C10.1.1"), {{2020, 100}, {2021, 300}, {2024, 1e9}}, {{2020, 4}, {2022, 16}},
           Reporting::Semiannual, false});
  reg.add({"b", NaceCode::parse("C10.1.1"), {{2020, 0.5}}, {}, Reporting::Semiannual, false});
  EnergyLedger ledger;
  for (int y = 2020; y <= 2024; ++y) {
    ledger.at("a", y).kwh = {10.0 * y, 5, 5};
    ledger.at("b", y).kwh = {1, 1, 1};
  }
  FitResult fa, fb;
  fa.id = "a";
  fb.id = "b";
  fa.elec_linear = line(0.5, 0.01);
  Diagnostics d;
  const auto f = build_scenario_firms({fa, fb}, ledger, reg, {2020, 2024}, {}, d);
  REQUIRE(f.size() == 2);
  CHECK(f[0].log_revenue == doctest::Approx(std::log(200.0)).epsilon(1e-15));
  CHECK(f[0].log_employees == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  CHECK(f[0].mean_total_kwh == doctest::Approx(10.0 * 2022 + 10).epsilon(1e-15));
  CHECK(f[0].observed.at(2021).first == 20210.0);
  CHECK(f[1].log_revenue == 0.0);
  CHECK(f[1].log_employees == 0.0);
}
