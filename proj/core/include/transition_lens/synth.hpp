#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "transition_lens/ingest.hpp"
#include "transition_lens/metrics.hpp"
#include "transition_lens/pricing.hpp"
#include "transition_lens/scenario.hpp"

namespace tlens::synth {

struct SectorWeight {
  std::string nace4;
  double weight = 1.0;
};

/// Parameters of a synthetic economy. Electrification trajectories are
/// planted per firm and every expenditure is built as kWh x band price, so
/// the pricing stage can invert it exactly.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t firms = 500;
  YearWindow window{2020, 2024};
  std::vector<SectorWeight> sectors{
      {"C10.1.1", 2}, {"C10.8.9", 1}, {"C22.2.2", 2}, {"C25.6.2", 2},
      {"F41.2.0", 1}, {"G46.9.0", 2}, {"G47.1.1", 2}, {"H49.4.1", 1},
      {"I55.1.0", 1}, {"I56.1.0", 1}, {"M71.1.2", 1}, {"N81.2.1", 1},
  };
  std::array<std::size_t, 3> providers{3, 3, 3};
  double annual_reporter_fraction = 0.1;

  double linear_fraction = 0.5;  // firms planted with a linear e(t); the rest exponential
  double e0_min = 0.15;          // electrification share in the first year
  double e0_max = 0.60;
  double trend_mean = -0.006;  // linear slope, per year
  double trend_sd = 0.015;
  double rate_mean = -0.02;  // exponential rate, per year
  double rate_sd = 0.05;

  double noise_sd = 0.0;          // additive noise on realised e(t)
  double volume_sd = 0.2;         // year-to-year log noise on total consumption; e(t) unaffected
  double outlier_fraction = 0.0;  // share of firm-years given a gross shock
  double outlier_scale = 0.5;     // relative size of that shock

  double log_revenue_mean = 20.0;  // ln HUF
  double log_revenue_sd = 1.5;
  double log_kwh_mean = 12.0;  // ln annual electricity kWh
  double log_kwh_sd = 1.5;
  std::size_t network_degree = 3;  // non-energy suppliers per firm
  double decoy_fraction = 0.0;     // firms planted to fail one sample filter
  double diesel_weight = 0.74;

  /// Throws ConfigError for infeasible settings.
  void validate() const;
};

struct PlantedFirm {
  FirmId id;
  std::string nace4;
  Reporting reporting = Reporting::Semiannual;
  TrendMode mode = TrendMode::Linear;
  double intercept = 0.0;  // e at the first year (linear) or ln e (exponential)
  double slope = 0.0;      // epsilon or mu
  std::map<int, std::array<double, 3>> kwh;  // realised annual kWh per carrier
  std::map<int, double> e_clean;             // planted, noise-free e(t)
  std::optional<ExclusionReason> decoy;
  bool transitioning = false;  // sign test on the noise-free l(t)
};

struct GroundTruth {
  std::vector<PlantedFirm> firms;

  [[nodiscard]] const PlantedFirm* find(const FirmId& id) const;
};

struct SynthData {
  std::vector<TransactionRecord> transactions;
  FirmRegistry registry;
  PriceBook prices;
  GridMixSeries grid_mix;
  GroundTruth truth;
};

/// Deterministic for a fixed config (including seed).
SynthData generate(const SynthConfig& config);

/// Writes transactions.csv, firms.csv, prices.csv, fuel_prices.csv,
/// grid_mix.csv and ground_truth.csv into `dir`.
void write(const SynthData& data, const std::filesystem::path& dir);

/// Aggregate low-carbon share per year by direct kWh summation over the
/// non-decoy firms: sum(E u) / sum(T).
std::map<int, double> oracle_aggregate(const GroundTruth& truth, const GridMixSeries& mix);

/// Smallest kWh >= `kwh` whose expenditure sits strictly inside one band of
/// `table` with a relative margin on both sides.
double representable_kwh(double kwh, const PriceTable& table, double margin = 1e-6);

}  // namespace tlens::synth
