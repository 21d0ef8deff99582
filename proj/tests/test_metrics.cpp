#include <doctest.h>

#include <random>

#include "support.hpp"
#include "transition_lens/metrics.hpp"

using namespace tlens;

namespace {

GridMixSeries paper_mix() {
  GridMixSeries m;
  const double u[] = {0.617984, 0.634349, 0.655953, 0.711712, 0.737821};
  for (int i = 0; i < 5; ++i) m.set(2020 + i, u[i]);
  return m;
}

FitResult with_slopes(double delta, double lambda) {
  FitResult f;
  f.id = "x";
  f.linear = LineFit{0.1, delta, 2020, true, 1, 0, 0};
  f.exponential = LineFit{-2, lambda, 2020, true, 1, 0, 0};
  return f;
}

}  // namespace

TEST_CASE("low-carbon shares: direct substitution") {
  EnergyLedger ledger;
  ledger.at("a", 2020).kwh = {50, 40, 10};
  ledger.at("b", 2020).kwh = {7, 3, 0};
  GridMixSeries mix;
  mix.set(2020, 0.6);
  Diagnostics d;
  const auto s = low_carbon_shares(ledger, mix, d);
  CHECK(s[0].values.at(2020).e == 0.5);
  CHECK(s[0].values.at(2020).l == doctest::Approx(0.3).epsilon(1e-15));

  GridMixSeries zero;
  zero.set(2020, 0.0);
  CHECK(low_carbon_shares(ledger, zero, d)[1].values.at(2020).l == 0.0);
}

TEST_CASE("low-carbon shares: the all-electric ceiling is u(2024)") {
  EnergyLedger ledger;
  ledger.at("a", 2024).kwh = {123, 0, 0};
  Diagnostics d;
  const auto s = low_carbon_shares(ledger, paper_mix(), d);
  CHECK(s[0].values.at(2024).l == 0.737821);
}

TEST_CASE("low-carbon shares: invariants and zero-energy years") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1000);
  EnergyLedger ledger;
  for (int i = 0; i < 50; ++i)
    for (int y = 2020; y <= 2024; ++y) ledger.at("f" + std::to_string(i), y).kwh = {u(rng), u(rng), u(rng)};
  ledger.at("empty", 2021).kwh = {0, 0, 0};
  Diagnostics d;
  const auto mix = paper_mix();
  for (const auto& s : low_carbon_shares(ledger, mix, d))
    for (const auto& [y, p] : s.values) {
      CHECK(p.l == p.e * mix.u(y));
      CHECK(0.0 <= p.l);
      CHECK(p.l <= p.e);
      CHECK(p.e <= 1.0);
    }
  CHECK(d.counter("zero-total-energy") == 1);

  EnergyLedger late;
  late.at("a", 2030).kwh = {1, 1, 1};
  CHECK_THROWS_AS(low_carbon_shares(late, mix, d), InputError);
}

TEST_CASE("grid mix series: bounds and csv round trip") {
  GridMixSeries m;
  CHECK_THROWS_AS(m.set(2020, 1.2), InputError);
  CHECK_THROWS_AS(m.set(2020, -0.1), InputError);
  m.set(2020, 0.5);
  m.set(2021, 0.75, MixProvenance::Forecast);
  test::TempDir dir("mix");
  m.write(dir / "m.csv");
  const auto back = GridMixSeries::read(dir / "m.csv");
  CHECK(back.u(2021) == 0.75);
  CHECK(back.points().at(2021).provenance == MixProvenance::Forecast);
  CHECK(back.measured().size() == 1);
  test::write_text(dir / "bad.csv", "year,u\n2020,1.5\n");
  CHECK_THROWS_AS(GridMixSeries::read(dir / "bad.csv"), SchemaError);
}

TEST_CASE("electrification fits separate the mix effect") {
  const auto mix = paper_mix();
  ShareSeries s{"a", {}};
  for (int y = 2020; y <= 2024; ++y) s.values[y] = {0.5, 0.5 * mix.u(y)};
  const auto f = fit_firm(s);
  CHECK(*f.epsilon() == 0.0);
  CHECK(*f.mu() == 0.0);
  CHECK(*f.delta() > 0.0);
  CHECK(*f.lambda() > 0.0);

  ShareSeries t{"b", {}};
  for (int y = 2020; y <= 2024; ++y) {
    const double e = 0.2 + 0.03 * (y - 2020);
    t.values[y] = {e, e * mix.u(y)};
  }
  const auto ef = electrification_fits(t);
  CHECK(ef.linear->slope == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(fit_firm(t).beta() == doctest::Approx(std::exp(fit_firm(t).exponential->intercept)));
}

TEST_CASE("transition status: strict signs on both fits") {
  CHECK(transition_status(with_slopes(0.01, 0.02)) == TransitionStatus::Transitioning);
  CHECK(transition_status(with_slopes(0.01, -0.001)) == TransitionStatus::NonTransitioning);
  CHECK(transition_status(with_slopes(-0.01, 0.001)) == TransitionStatus::NonTransitioning);
  CHECK(transition_status(with_slopes(0.0, 0.02)) == TransitionStatus::NonTransitioning);
  FitResult missing;
  missing.linear = LineFit{};
  CHECK_FALSE(transition_status(missing).has_value());
}

TEST_CASE("transition status: flipping delta negative never makes a firm transition") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double d = u(rng), l = u(rng);
    const auto before = transition_status(with_slopes(d, l));
    const auto after = transition_status(with_slopes(-std::abs(d), l));
    if (before == TransitionStatus::NonTransitioning) CHECK(after == TransitionStatus::NonTransitioning);
  }
}

TEST_CASE("fit_all: failures recorded, order kept; fits.csv round trips") {
  const auto mix = paper_mix();
  std::vector<ShareSeries> shares;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 30; ++i) {
    ShareSeries s{"f" + std::to_string(100 + i), {}};
    for (int y = 2020; y <= 2024; ++y) {
      const double e = u(rng);
      s.values[y] = {e, e * mix.u(y)};
    }
    shares.push_back(s);
  }
  shares.push_back({"short", {{2020, {0.5, 0.3}}, {2021, {0.5, 0.3}}}});
  Diagnostics d;
  const auto fits = fit_all(shares, {}, 4, d);
  REQUIRE(fits.size() == shares.size());
  for (std::size_t i = 0; i < fits.size(); ++i) CHECK(fits[i].id == shares[i].id);
  CHECK_FALSE(fits.back().linear.has_value());
  CHECK(d.counter("fit-failed") == 1);

  test::TempDir dir("fits");
  write_fits(dir / "fits.csv", fits);
  const auto back = read_fits(dir / "fits.csv");
  REQUIRE(back.size() == fits.size());
  for (std::size_t i = 0; i + 1 < fits.size(); ++i) {
    CHECK(back[i].delta() == fits[i].delta());
    CHECK(back[i].lambda() == fits[i].lambda());
    CHECK(back[i].epsilon() == fits[i].epsilon());
    CHECK(back[i].mu() == fits[i].mu());
    CHECK(back[i].elec_linear->intercept == fits[i].elec_linear->intercept);
    CHECK(back[i].elec_exponential->converged == fits[i].elec_exponential->converged);
    CHECK(back[i].linear->iterations == fits[i].linear->iterations);
  }
  CHECK_FALSE(back.back().delta().has_value());
  const auto text = test::read_text(dir / "fits.csv");
  CHECK(text.find("undefined") != std::string::npos);
}
