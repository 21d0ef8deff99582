#include <doctest.h>

#include <random>

#include "support.hpp"
#include "transition_lens/classify.hpp"
#include "transition_lens/csv.hpp"

using namespace tlens;

namespace {

FitResult fit_with(const FirmId& id, double delta, double lambda) {
  FitResult f;
  f.id = id;
  f.linear = LineFit{0.1, delta, 2020, true, 1, 0, 0};
  f.exponential = LineFit{-2, lambda, 2020, true, 1, 0, 0};
  return f;
}

std::vector<FirmFeatures> random_sector(std::mt19937_64& rng, int n, char section) {
  std::normal_distribution<double> nd(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<FirmFeatures> out;
  for (int i = 0; i < n; ++i) {
    FirmFeatures f;
    f.id = std::string(1, section) + std::to_string(i);
    f.section = section;
    f.fc = std::exp(-3 + 0.5 * nd(rng));
    f.ec = std::exp(-3.5 + 0.5 * nd(rng));
    f.revenue = std::exp(20 + nd(rng));
    f.employees = std::exp(3 + nd(rng));
    f.total_kwh = std::exp(12 + nd(rng));
    const double eta = -1.0 - 0.8 * (std::log(f.fc) + 3) + 0.3 * (std::log(f.revenue) - 20);
    f.transitioning = u(rng) < 1 / (1 + std::exp(-eta));
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.0005) == "***");
  CHECK(significance_stars(0.005) == "**");
  CHECK(significance_stars(0.03) == "*");
  CHECK(significance_stars(0.07) == ".");
  CHECK(significance_stars(0.5) == "");
  CHECK(significance_stars(0.05) == ".");
}

TEST_CASE("odds ratio for a 10% predictor increase") {
  CHECK(odds_ratio(0.0) == 1.0);
  CHECK(odds_ratio(10.0 * std::log(2.0)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(odds_ratio(-0.887) == doctest::Approx(std::exp(-0.0887)).epsilon(1e-15));
  CHECK(odds_ratio(1.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("format_aor") {
  LogitCoefficient c;
  c.aor = 0.9153;
  c.stars = "***";
  c.ci_low = 0.9021;
  c.ci_high = 0.9288;
  CHECK(format_aor(c) == "0.915*** [0.902, 0.929]");
  c.stars = "";
  c.aor = 1.0;
  c.ci_low = 0.8;
  c.ci_high = 1.25;
  CHECK(format_aor(c) == "1.000 [0.800, 1.250]");
}

TEST_CASE("prepare_features: window averages of per-year ratios") {
  FirmRegistry reg;
  FirmMeta a{"a", NaceCode::parse("C10.1.1"), {{2020, 1000}, {2021, 2000}}, {{2020, 10}, {2021, 20}},
             Reporting::Semiannual, false};
  FirmMeta z{"z", NaceCode::parse("C10.1.1"), {{2020, 1000}}, {{2020, 0}}, Reporting::Semiannual, false};
  FirmMeta nr{"nr", NaceCode::parse("G47.1.1"), {}, {{2020, 5}}, Reporting::Semiannual, false};
  reg.add(a);
  reg.add(z);
  reg.add(nr);

  EnergyLedger ledger;
  auto& a20 = ledger.at("a", 2020);
  a20.kwh = {100, 50, 10};
  a20.huf = {50, 60, 40};  // fossil 100 over revenue 1000
  auto& a21 = ledger.at("a", 2021);
  a21.kwh = {200, 40, 0};
  a21.huf = {80, 100, 0};
  ledger.at("z", 2020).kwh = {1, 1, 1};
  ledger.at("z", 2020).huf = {1, 1, 1};
  ledger.at("nr", 2020).kwh = {1, 1, 1};
  ledger.at("nr", 2020).huf = {1, 1, 1};

  const std::vector<FitResult> fits{fit_with("a", 0.01, 0.02), fit_with("z", 0.01, 0.02),
                                    fit_with("nr", -0.01, 0.02), FitResult{"u", {}, {}, {}, {}}};
  Diagnostics d;
  const auto f = prepare_features(fits, ledger, reg, {2020, 2021}, d);
  REQUIRE(f.size() == 1);
  CHECK(f[0].id == "a");
  CHECK(f[0].section == 'C');
  CHECK(f[0].fc == doctest::Approx((100.0 / 1000 + 100.0 / 2000) / 2).epsilon(1e-15));
  CHECK(f[0].ec == doctest::Approx((50.0 / 1000 + 80.0 / 2000) / 2).epsilon(1e-15));
  CHECK(f[0].revenue == 1500.0);
  CHECK(f[0].employees == 15.0);
  CHECK(f[0].total_kwh == 200.0);
  CHECK(f[0].transitioning);
  CHECK(d.counter("features-dropped:zero-employees") == 1);
  CHECK(d.counter("features-dropped:nonpositive-revenue") == 1);
  CHECK(d.counter("features-dropped:undefined-status") == 1);

  // Single-year fc = 0.1 exactly.
  const auto one = prepare_features({fits[0]}, ledger, reg, {2020, 2020}, d);
  CHECK(one[0].fc == 0.1);
  const auto logs = one[0].log_predictors();
  CHECK(logs[0] == std::log(0.1));
  CHECK(logs[4] == std::log(160.0));
}

TEST_CASE("fit_sector: skip rules") {
  std::mt19937_64 rng(5);
  const auto small = random_sector(rng, 20, 'C');
  std::string why;
  CHECK_FALSE(fit_sector("C", small, {}, &why).has_value());
  CHECK(why.find("too few") != std::string::npos);

  auto same = random_sector(rng, 40, 'C');
  for (auto& f : same) f.transitioning = false;
  CHECK_FALSE(fit_sector("C", same, {}, &why).has_value());
  CHECK(why == "single outcome class");
}

TEST_CASE("fit_sector: coefficients, intervals and p-values follow from the logit fit") {
  std::mt19937_64 rng(6);
  const auto firms = random_sector(rng, 400, 'C');
  const auto s = fit_sector("C", firms, {});
  REQUIRE(s.has_value());
  CHECK(s->n == 400);

  Eigen::MatrixXd x(400, 6);
  Eigen::VectorXd y(400);
  for (int i = 0; i < 400; ++i) {
    const auto& f = firms[static_cast<std::size_t>(i)];
    x(i, 0) = 1;
    x(i, 1) = std::log(f.fc);
    x(i, 2) = std::log(f.ec);
    x(i, 3) = std::log(f.revenue);
    x(i, 4) = std::log(f.employees);
    x(i, 5) = std::log(f.total_kwh);
    y[i] = f.transitioning;
  }
  std::vector<std::string> names{"intercept"};
  names.insert(names.end(), kPredictorNames.begin(), kPredictorNames.end());
  const auto direct = fit_logit(x, y, names);
  CHECK(s->intercept == direct.beta[0]);
  REQUIRE(s->coefficients.size() == 5);
  for (int j = 0; j < 5; ++j) {
    const auto& c = s->coefficients[static_cast<std::size_t>(j)];
    const double se = std::sqrt(direct.cov_robust(j + 1, j + 1));
    CHECK(c.predictor == kPredictorNames[static_cast<std::size_t>(j)]);
    CHECK(c.beta == direct.beta[j + 1]);
    CHECK(c.se == doctest::Approx(se).epsilon(1e-15));
    CHECK(c.aor == doctest::Approx(std::exp(0.1 * c.beta)).epsilon(1e-15));
    CHECK(c.ci_low == doctest::Approx(std::exp(0.1 * (c.beta - 1.96 * se))).epsilon(1e-14));
    CHECK(c.ci_high == doctest::Approx(std::exp(0.1 * (c.beta + 1.96 * se))).epsilon(1e-14));
    CHECK(c.ci_low < c.aor);
    CHECK(c.aor < c.ci_high);
    CHECK(c.p_value == doctest::Approx(std::erfc(std::abs(c.beta / se) / std::sqrt(2.0))).epsilon(1e-12));
  }
  // The fossil share effect is planted negative and strong.
  CHECK(s->coefficients[0].aor < 1.0);
}

TEST_CASE("classify_sectors: per-section fits, skipped sectors reported") {
  std::mt19937_64 rng(7);
  auto firms = random_sector(rng, 200, 'C');
  const auto g = random_sector(rng, 10, 'G');
  firms.insert(firms.end(), g.begin(), g.end());
  Diagnostics d;
  const auto r1 = classify_sectors(firms, {}, 1, d);
  const auto r4 = classify_sectors(firms, {}, 4, d);
  REQUIRE(r1.sectors.size() == 1);
  CHECK(r1.sectors[0].sector == "C");
  CHECK(r1.skipped.count("G") == 1);
  CHECK(r4.sectors[0].coefficients[2].beta == r1.sectors[0].coefficients[2].beta);

  test::TempDir dir("logit");
  write_logit_results(dir / "l.csv", r1);
  const auto t = csv::Table::read(dir / "l.csv");
  CHECK(t.rows() == 6);
  CHECK(t.cell(5, 0) == "G");
  CHECK(t.cell(5, 12).find("skipped") == 0);
}
