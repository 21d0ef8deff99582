#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "transition_lens/common.hpp"
#include "transition_lens/robust_fit.hpp"

using namespace tlens;

namespace {

YearSeries series(std::initializer_list<double> values, int first = 2020) {
  YearSeries s;
  int y = first;
  for (double v : values) s.emplace(y++, v);
  return s;
}

// Huber estimating equations at the returned line, with the final scale.
std::pair<double, double> psi_sums(const YearSeries& s, const LineFit& f, double k) {
  double s0 = 0, s1 = 0;
  for (const auto& [year, v] : s) {
    const double t = year - f.base_year;
    const double z = (v - f.at(year)) / f.scale;
    const double psi = std::clamp(z, -k, k);
    s0 += psi;
    s1 += psi * t;
  }
  return {s0, s1};
}

double theil_sen(const YearSeries& s) {
  std::vector<double> slopes;
  for (auto i = s.begin(); i != s.end(); ++i)
    for (auto j = std::next(i); j != s.end(); ++j)
      slopes.push_back((j->second - i->second) / (j->first - i->first));
  std::sort(slopes.begin(), slopes.end());
  const auto n = slopes.size();
  return n % 2 ? slopes[n / 2] : 0.5 * (slopes[n / 2 - 1] + slopes[n / 2]);
}

}  // namespace

TEST_CASE("huber loss and weights") {
  CHECK(huber_loss(1.0, 1.345) == 0.5);
  CHECK(huber_loss(2.0, 1.345) == doctest::Approx(1.7854875).epsilon(1e-15));
  CHECK(huber_loss(-2.0, 1.345) == huber_loss(2.0, 1.345));
  CHECK(huber_weight(1.0, 1.345) == 1.0);
  CHECK(huber_weight(2.69, 1.345) == doctest::Approx(0.5));
}

TEST_CASE("huber fit: trivial series") {
  const auto c = huber_fit_linear(series({0.3, 0.3, 0.3, 0.3, 0.3}));
  CHECK(c.slope == 0.0);
  CHECK(c.intercept == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(c.converged);

  YearSeries line;
  for (int t = 0; t < 5; ++t) line.emplace(2020 + t, 0.1 + 0.02 * t);
  const auto l = huber_fit_linear(line);
  CHECK(std::abs(l.slope - 0.02) < 1e-12);
  CHECK(std::abs(l.intercept - 0.1) < 1e-12);
  CHECK(l.base_year == 2020);
  CHECK(l.converged);

  YearSeries expo;
  for (int t = 0; t < 5; ++t) expo.emplace(2020 + t, 0.1 * std::exp(0.05 * t));
  const auto e = huber_fit_exponential(expo);
  CHECK(std::abs(e.slope - 0.05) < 1e-10);
  CHECK(std::exp(e.intercept) == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(huber_fit_exponential(series({2, 2, 2, 2})).slope == 0.0);
}

TEST_CASE("huber fit: errors") {
  CHECK_THROWS_AS(huber_fit_linear(series({1, 2})), FitError);
  CHECK_THROWS_AS(huber_fit_linear(series({1, NAN, 2})), FitError);
  CHECK_THROWS_AS(huber_fit_exponential(series({1, 0, 2})), FitError);
  CHECK_THROWS_AS(huber_fit_exponential(series({1, -1, 2})), FitError);
}

TEST_CASE("huber fit: equals the OLS oracle when no residual exceeds k") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.01);
  int tested = 0;
  while (tested < 300) {
    std::vector<double> x, y;
    YearSeries s;
    for (int t = 0; t < 5; ++t) {
      x.push_back(2020 + t);
      y.push_back(0.4 + 0.01 * t + noise(rng));
      s.emplace(2020 + t, y.back());
    }
    const auto [a, b] = test::ols_oracle(x, y, 2020);
    double scale;
    {
      std::vector<double> r;
      for (int i = 0; i < 5; ++i) r.push_back(std::abs(y[i] - a - b * i));
      std::sort(r.begin(), r.end());
      scale = r[2] / 0.6745;
      if (r[4] / scale > 1.345) continue;
    }
    const auto f = huber_fit_linear(s);
    CHECK(std::abs(f.slope - b) < 1e-9);
    CHECK(std::abs(f.intercept - a) < 1e-9);
    ++tested;
  }
}

TEST_CASE("huber fit: one gross outlier hurts OLS more") {
  // Exact line with the middle point pushed far off.
  YearSeries s;
  for (int t = 0; t < 5; ++t) s.emplace(2020 + t, 0.2 + 0.01 * t + (t == 3 ? 0.3 : 0.0) + 0.001 * (t % 2));
  const auto robust = huber_fit_linear(s);
  const auto ols = ols_fit(s);
  CHECK(std::abs(robust.slope - 0.01) < std::abs(ols.slope - 0.01));
}

TEST_CASE("huber fit: solution satisfies the estimating equations") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::uniform_int_distribution<int> pos(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    YearSeries s;
    const int bad = pos(rng);
    for (int t = 0; t < 5; ++t) s.emplace(2020 + t, 0.5 - 0.02 * t + noise(rng) + (t == bad ? 0.5 : 0.0));
    const auto f = huber_fit_linear(s);
    if (!f.converged || f.scale == 0.0) continue;
    const auto [s0, s1] = psi_sums(s, f, 1.345);
    // Parameter tolerance 1e-8 on data of order 1 leaves the sums near zero.
    CHECK(std::abs(s0) < 1e-5);
    CHECK(std::abs(s1) < 1e-5);
  }
}

TEST_CASE("huber fit: equivariance") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    YearSeries s, shifted, later;
    for (int t = 0; t < 5; ++t) {
      const double v = 0.3 + 0.02 * t + noise(rng);
      s.emplace(2020 + t, v);
      shifted.emplace(2020 + t, v + 0.25);
      later.emplace(2030 + t, v);
    }
    const auto f = huber_fit_linear(s);
    const auto g = huber_fit_linear(shifted);
    const auto h = huber_fit_linear(later);
    CHECK(g.slope == doctest::Approx(f.slope).epsilon(1e-7));
    CHECK(g.intercept - f.intercept == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(h.slope == f.slope);
    CHECK(h.intercept == f.intercept);
  }
}

TEST_CASE("huber exponential equals huber linear on logs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  for (int trial = 0; trial < 100; ++trial) {
    YearSeries s, logs;
    for (int t = 0; t < 5; ++t) {
      const double v = u(rng);
      s.emplace(2020 + t, v);
      logs.emplace(2020 + t, std::log(v));
    }
    const auto e = huber_fit_exponential(s);
    const auto l = huber_fit_linear(logs);
    CHECK(e.slope == l.slope);
    CHECK(e.intercept == l.intercept);
  }
}

TEST_CASE("huber slope sign matches the Theil-Sen oracle on monotone series") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> step(0.001, 0.1);
  for (int trial = 0; trial < 300; ++trial) {
    YearSeries s;
    double v = 0.3;
    const double dir = trial % 2 ? 1.0 : -1.0;
    for (int t = 0; t < 5; ++t) {
      s.emplace(2020 + t, v);
      v += dir * step(rng);
    }
    const double ts = theil_sen(s);
    const double h = huber_fit_linear(s).slope;
    CHECK((ts > 0) == (h > 0));
    CHECK((ts < 0) == (h < 0));
  }
}

TEST_CASE("ols fit: closed-form oracle") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x, y;
    YearSeries s;
    for (int t = 0; t < 7; ++t) {
      x.push_back(2014 + t);
      y.push_back(u(rng));
      s.emplace(2014 + t, y.back());
    }
    const auto [a, b] = test::ols_oracle(x, y, 2014);
    const auto f = ols_fit(s);
    CHECK(f.slope == doctest::Approx(b).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(a).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ols_fit(series({1.0})), FitError);
}
