#include "transition_lens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "transition_lens/csv.hpp"

namespace tlens::synth {

namespace {

// Price multipliers per semester; the 2022 spike mirrors the energy crisis.
double price_factor(int year, Semester s) {
  static const std::map<std::pair<int, int>, double> kFactors{
      {{2020, 1}, 1.00}, {{2020, 2}, 0.98}, {{2021, 1}, 1.05}, {{2021, 2}, 1.30},
      {{2022, 1}, 1.90}, {{2022, 2}, 2.60}, {{2023, 1}, 2.20}, {{2023, 2}, 1.70},
      {{2024, 1}, 1.40}, {{2024, 2}, 1.35},
  };
  const auto it = kFactors.find({year, static_cast<int>(s)});
  return it == kFactors.end() ? 1.0 + 0.02 * (year - 2020) : it->second;
}

const std::vector<double> kElecLower{0.0, 20e3, 500e3, 2e6, 20e6, 70e6, 150e6};
const std::vector<double> kElecPrice{95.0, 80.0, 70.0, 62.0, 55.0, 50.0, 47.0};
const std::vector<double> kGasLower{0.0, 277'778.0, 2'777'778.0, 27'777'778.0, 277'777'778.0,
                                    1'111'111'111.0};
const std::vector<double> kGasPrice{40.0, 33.0, 28.0, 24.0, 21.0, 19.0};

const std::array<std::vector<std::string>, 3> kProviderCodes{{
    {"D35.1.1", "D35.1.4", "D35.1"},
    {"D35.2.2", "D35.2.3"},
    {"C19.2.0", "G47.3.0", "G46.7.1"},
}};

double default_mix(int year) {
  static const std::map<int, double> kMeasured{
      {2020, 0.617984}, {2021, 0.634349}, {2022, 0.655953}, {2023, 0.711712}, {2024, 0.737821}};
  const auto it = kMeasured.find(year);
  return it != kMeasured.end() ? it->second : std::clamp(0.62 + 0.03 * (year - 2020), 0.0, 1.0);
}

std::string firm_id(char prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<>(a, b)(gen_); }
  double normal(double m, double s) { return s > 0 ? std::normal_distribution<>(m, s)(gen_) : m; }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

// Splits `amount` over 1-2 providers and the given semesters.
void emit(std::vector<TransactionRecord>& out, Rng& rng, const std::vector<FirmId>& providers,
          const FirmId& buyer, Period period, double amount) {
  if (!(amount > 0.0)) return;
  const std::size_t k = providers.size() > 1 && rng.chance(0.5) ? 2 : 1;
  const std::size_t first = rng.index(providers.size());
  if (k == 1) {
    out.push_back({providers[first], buyer, period, amount});
    return;
  }
  const double share = rng.uniform(0.2, 0.8);
  const double a = amount * share;
  out.push_back({providers[first], buyer, period, a});
  out.push_back({providers[(first + 1) % providers.size()], buyer, period, amount - a});
}

}  // namespace

void SynthConfig::validate() const {
  if (firms < 1) throw ConfigError("synth: firm count must be >= 1");
  if (window.size() < 3) throw ConfigError("synth: window needs at least 3 years");
  if (sectors.empty()) throw ConfigError("synth: sector distribution is empty");
  for (const auto& s : sectors) {
    NaceCode::parse(s.nace4);
    if (!(s.weight > 0.0)) throw ConfigError("synth: sector weights must be positive");
  }
  for (auto n : providers)
    if (n < 1) throw ConfigError("synth: provider counts must be >= 1");
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("synth: ") + name + " outside [0,1]");
  };
  fraction(annual_reporter_fraction, "annual_reporter_fraction");
  fraction(linear_fraction, "linear_fraction");
  fraction(outlier_fraction, "outlier_fraction");
  fraction(decoy_fraction, "decoy_fraction");
  fraction(diesel_weight, "diesel_weight");
  if (!(e0_min > 0.0 && e0_min <= e0_max && e0_max < 1.0))
    throw ConfigError("synth: planted shares must satisfy 0 < e0_min <= e0_max < 1");
  if (noise_sd < 0.0 || volume_sd < 0.0 || outlier_scale < 0.0 || trend_sd < 0.0 || rate_sd < 0.0)
    throw ConfigError("synth: spreads must be non-negative");
}

const PlantedFirm* GroundTruth::find(const FirmId& id) const {
  const auto it = std::lower_bound(firms.begin(), firms.end(), id,
                                   [](const PlantedFirm& f, const FirmId& v) { return f.id < v; });
  return it != firms.end() && it->id == id ? &*it : nullptr;
}

double representable_kwh(double kwh, const PriceTable& table, double margin) {
  const auto& bands = table.bands();
  for (std::size_t guard = 0; guard < 2 * bands.size() + 4; ++guard) {
    std::size_t b = 0;
    while (b + 1 < bands.size() && bands[b + 1].lower_kwh <= kwh) ++b;
    const double x = kwh * bands[b].price;
    const auto low = table.assign_band(x * (1.0 - margin));
    const auto high = table.assign_band(x * (1.0 + margin));
    if (low == b && high == b) return kwh;
    // Above the band's monetary range: skip the kWh gap to the next band.
    if (high > b && b + 1 < bands.size()) kwh = bands[b + 1].lower_kwh * (1.0 + 4.0 * margin);
    else kwh = std::max(kwh, bands[b].lower_kwh) * (1.0 + 4.0 * margin);
  }
  throw Error("synth: could not place " + std::to_string(kwh) + " kWh inside a price band");
}

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthData data;
  const auto years = cfg.window.years();

  // Prices.
  for (int y : years)
    for (auto s : {Semester::H1, Semester::H2}) {
      const double f = price_factor(y, s);
      std::vector<PriceBand> elec, gas;
      for (std::size_t b = 0; b < kElecLower.size(); ++b) elec.push_back({kElecLower[b], kElecPrice[b] * f});
      for (std::size_t b = 0; b < kGasLower.size(); ++b)
        gas.push_back({kGasLower[b], kGasPrice[b] * (0.5 + 0.5 * f)});
      data.prices.add(PriceTable(Carrier::Electricity, {y, s}, std::move(elec)));
      data.prices.add(PriceTable(Carrier::Gas, {y, s}, std::move(gas)));
      data.prices.add(FuelPrices{{y, s}, 48.0 * f, 52.0 * f, cfg.diesel_weight});
    }

  for (int y : years) data.grid_mix.set(y, default_mix(y), MixProvenance::Measured);

  std::set<int> all_years(years.begin(), years.end());
  data.registry.declare_years(all_years, all_years);

  // Providers.
  std::array<std::vector<FirmId>, 3> providers;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < cfg.providers[c]; ++i) {
      FirmMeta m;
      m.id = "P" + std::string(1, "EGO"[c]) + firm_id('-', i, 3).substr(1);
      m.nace = NaceCode::parse(kProviderCodes[c][i % kProviderCodes[c].size()]);
      for (int y : years) {
        m.revenue[y] = 1e11;
        m.employees[y] = 500;
      }
      providers[c].push_back(m.id);
      data.registry.add(std::move(m));
    }

  double weight_sum = 0.0;
  for (const auto& s : cfg.sectors) weight_sum += s.weight;

  const int width = std::max(6, static_cast<int>(std::to_string(cfg.firms).size()));
  std::vector<FirmId> regular;
  for (std::size_t i = 0; i < cfg.firms; ++i) {
    PlantedFirm pf;
    pf.id = firm_id('F', i, width);
    regular.push_back(pf.id);

    double pick = rng.uniform(0.0, weight_sum);
    pf.nace4 = cfg.sectors.back().nace4;
    for (const auto& s : cfg.sectors) {
      if (pick < s.weight) {
        pf.nace4 = s.nace4;
        break;
      }
      pick -= s.weight;
    }
    pf.reporting = rng.chance(cfg.annual_reporter_fraction) ? Reporting::Annual : Reporting::Semiannual;

    // Planted electrification trajectory, redrawn until it stays in [0.02, 0.98].
    pf.mode = rng.chance(cfg.linear_fraction) ? TrendMode::Linear : TrendMode::Exponential;
    const double e0 = rng.uniform(cfg.e0_min, cfg.e0_max);
    auto share = [&](int y) {
      const double dt = static_cast<double>(y - cfg.window.first);
      return pf.mode == TrendMode::Linear ? pf.intercept + pf.slope * dt
                                          : std::exp(pf.intercept + pf.slope * dt);
    };
    pf.intercept = pf.mode == TrendMode::Linear ? e0 : std::log(e0);
    for (int attempt = 0;; ++attempt) {
      pf.slope = attempt >= 50 ? 0.0
                 : pf.mode == TrendMode::Linear ? rng.normal(cfg.trend_mean, cfg.trend_sd)
                                                : rng.normal(cfg.rate_mean, cfg.rate_sd);
      const bool ok = std::all_of(years.begin(), years.end(), [&](int y) {
        const double e = share(y);
        return e >= 0.02 && e <= 0.98;
      });
      if (ok) break;
    }

    // Decoys fail exactly one sample filter.
    static constexpr std::array<ExclusionReason, 5> kDecoys{
        ExclusionReason::FinancialSector, ExclusionReason::ExcludedActivity,
        ExclusionReason::EtsMember, ExclusionReason::DiscontinuousGas,
        ExclusionReason::MissingRevenue};
    if (cfg.decoy_fraction > 0.0 && rng.chance(cfg.decoy_fraction)) {
      pf.decoy = kDecoys[rng.index(kDecoys.size())];
      if (*pf.decoy == ExclusionReason::FinancialSector) pf.nace4 = "K64.1.9";
      if (*pf.decoy == ExclusionReason::ExcludedActivity) pf.nace4 = "H52.2.1";
    }
    const int gap_year = years[years.size() / 2];

    FirmMeta meta;
    meta.id = pf.id;
    meta.nace = NaceCode::parse(pf.nace4);
    meta.reporting = pf.reporting;
    meta.ets_member = pf.decoy == ExclusionReason::EtsMember;
    const double log_rev = rng.normal(cfg.log_revenue_mean, cfg.log_revenue_sd);
    const double staff = std::max(1.0, std::round(std::exp(log_rev - 16.5 + rng.normal(0.0, 0.5))));
    for (int y : years) {
      if (pf.decoy == ExclusionReason::MissingRevenue && y == gap_year) continue;
      meta.revenue[y] = std::exp(log_rev + rng.normal(0.0, 0.05));
      meta.employees[y] = staff;
    }
    data.registry.add(std::move(meta));

    const double base_kwh = std::exp(rng.normal(cfg.log_kwh_mean, cfg.log_kwh_sd));
    const double growth = rng.normal(0.0, 0.03);
    for (int y : years) {
      const double dt = static_cast<double>(y - cfg.window.first);
      const double clean = share(y);
      pf.e_clean[y] = clean;
      double e = clean + rng.normal(0.0, cfg.noise_sd);
      if (cfg.outlier_fraction > 0.0 && rng.chance(cfg.outlier_fraction))
        e *= 1.0 + (rng.chance(0.5) ? 1.0 : -1.0) * cfg.outlier_scale;
      e = std::clamp(e, 0.01, 0.99);

      const Period h1{y, Semester::H1}, h2{y, Semester::H2};
      const bool annual = pf.reporting == Reporting::Annual;
      const double split = rng.uniform(0.4, 0.6);
      const double target_e = base_kwh * std::exp(growth * dt + rng.normal(0.0, cfg.volume_sd));

      // Electricity first; everything else follows from the planted share.
      std::array<double, 2> elec{};
      if (annual) {
        elec[0] = representable_kwh(target_e, data.prices.annual_table(Carrier::Electricity, y));
      } else {
        elec[0] = representable_kwh(target_e * split, data.prices.table(Carrier::Electricity, h1));
        elec[1] = representable_kwh(target_e * (1 - split), data.prices.table(Carrier::Electricity, h2));
      }
      const double e_kwh = elec[0] + elec[1];
      const double non_elec = e_kwh / e - e_kwh;

      const bool no_gas = pf.decoy == ExclusionReason::DiscontinuousGas && y == gap_year;
      std::array<double, 2> gas{};
      double gas_kwh = 0.0, oil_kwh = non_elec;
      if (!no_gas) {
        for (double frac = rng.uniform(0.2, 0.9);; frac *= 0.5) {
          if (annual) {
            gas[0] = representable_kwh(frac * non_elec, data.prices.annual_table(Carrier::Gas, y));
          } else {
            gas[0] = representable_kwh(frac * non_elec * split, data.prices.table(Carrier::Gas, h1));
            gas[1] = representable_kwh(frac * non_elec * (1 - split), data.prices.table(Carrier::Gas, h2));
          }
          gas_kwh = gas[0] + gas[1];
          oil_kwh = non_elec - gas_kwh;
          if (oil_kwh > 0.02 * non_elec) break;
        }
      }
      pf.kwh[y] = {e_kwh, gas_kwh, oil_kwh};

      if (annual) {
        // Annual reporters: the yearly spend is spread over both semesters.
        auto spend = [&](Carrier c, double kwh_year) {
          const auto table = data.prices.annual_table(c, y);
          std::size_t b = 0;
          while (b + 1 < table.bands().size() && table.bands()[b + 1].lower_kwh <= kwh_year) ++b;
          return kwh_year * table.bands()[b].price;
        };
        const double xe = spend(Carrier::Electricity, elec[0]);
        const double xg = gas[0] > 0.0 ? spend(Carrier::Gas, gas[0]) : 0.0;
        const double xo = spend(Carrier::Oil, oil_kwh);
        for (auto [c, x] : {std::pair{Carrier::Electricity, xe}, std::pair{Carrier::Gas, xg},
                            std::pair{Carrier::Oil, xo}}) {
          const double first = x * split;
          emit(data.transactions, rng, providers[index(c)], pf.id, h1, first);
          emit(data.transactions, rng, providers[index(c)], pf.id, h2, x - first);
        }
      } else {
        auto spend = [&](Carrier c, Period p, double kwh) {
          const auto& table = data.prices.table(c, p);
          std::size_t b = 0;
          while (b + 1 < table.bands().size() && table.bands()[b + 1].lower_kwh <= kwh) ++b;
          return kwh * table.bands()[b].price;
        };
        const Period periods[2] = {h1, h2};
        for (int s = 0; s < 2; ++s) {
          emit(data.transactions, rng, providers[0], pf.id, periods[s],
               spend(Carrier::Electricity, periods[s], elec[s]));
          if (gas[s] > 0.0)
            emit(data.transactions, rng, providers[1], pf.id, periods[s],
                 spend(Carrier::Gas, periods[s], gas[s]));
          emit(data.transactions, rng, providers[2], pf.id, periods[s],
               spend(Carrier::Oil, periods[s], oil_kwh * (s == 0 ? split : 1 - split)));
        }
      }
    }

    // Noise-free status: sign of the OLS slopes of l and ln l.
    YearSeries l_clean, ln_l;
    for (int y : years) {
      const double l = pf.e_clean[y] * data.grid_mix.u(y);
      l_clean.emplace(y, l);
      ln_l.emplace(y, std::log(l));
    }
    pf.transitioning = ols_fit(l_clean).slope > 0.0 && ols_fit(ln_l).slope > 0.0;
    data.truth.firms.push_back(std::move(pf));
  }

  // Ordinary supply relations among non-energy firms, for partner statistics.
  if (regular.size() > 1)
    for (const auto& buyer : regular)
      for (std::size_t d = 0; d < cfg.network_degree; ++d) {
        auto supplier = regular[rng.index(regular.size())];
        if (supplier == buyer) continue;
        const double amount = std::exp(rng.normal(14.0, 1.0));
        for (int y : years) data.transactions.push_back({supplier, buyer, {y, Semester::H1}, amount});
      }

  return data;
}

void write(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_transactions(dir / "transactions.csv", data.transactions);
  data.registry.write(dir / "firms.csv");
  data.prices.write(dir / "prices.csv", dir / "fuel_prices.csv");
  data.grid_mix.write(dir / "grid_mix.csv");

  csv::Writer w(dir / "ground_truth.csv",
                {"id", "year", "nace4", "reporting", "planted_mode", "planted_intercept",
                 "planted_slope", "e_clean", "electricity_kwh", "gas_kwh", "oil_kwh",
                 "decoy_reason", "transitioning"});
  for (const auto& f : data.truth.firms)
    for (const auto& [y, kwh] : f.kwh) {
      w << std::string_view(f.id) << y << std::string_view(f.nace4) << to_string(f.reporting)
        << std::string_view(f.mode == TrendMode::Linear ? "linear" : "exponential") << f.intercept
        << f.slope << f.e_clean.at(y) << kwh[0] << kwh[1] << kwh[2]
        << (f.decoy ? to_string(*f.decoy) : std::string_view("")) << f.transitioning;
      w.end_row();
    }
}

std::map<int, double> oracle_aggregate(const GroundTruth& truth, const GridMixSeries& mix) {
  std::map<int, std::pair<double, double>> sums;  // year -> (sum E u, sum T)
  for (const auto& f : truth.firms) {
    if (f.decoy) continue;
    for (const auto& [y, kwh] : f.kwh) {
      auto& s = sums[y];
      s.first += kwh[0] * mix.u(y);
      s.second += kwh[0] + kwh[1] + kwh[2];
    }
  }
  std::map<int, double> out;
  for (const auto& [y, s] : sums) out.emplace(y, s.first / s.second);
  return out;
}

}  // namespace tlens::synth
