#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "transition_lens/ingest.hpp"
#include "transition_lens/ledger.hpp"
#include "transition_lens/logit.hpp"
#include "transition_lens/metrics.hpp"

namespace tlens {

inline const std::array<std::string, 5> kPredictorNames{
    "fossil_cost_share", "electricity_cost_share", "revenue", "employees", "total_energy"};

/// Window-averaged firm characteristics and the binary transition outcome.
struct FirmFeatures {
  FirmId id;
  char section = '?';
  double fc = 0.0;         // fossil spend / revenue
  double ec = 0.0;         // electricity spend / revenue
  double revenue = 0.0;    // HUF
  double employees = 0.0;  // headcount
  double total_kwh = 0.0;
  bool transitioning = false;

  /// Natural logs in kPredictorNames order.
  [[nodiscard]] std::array<double, 5> log_predictors() const;
};

/// Builds features for every firm with a defined transition status. Firms
/// whose averages are non-positive (log undefined) are dropped and counted
/// under a reason code in `diag`.
std::vector<FirmFeatures> prepare_features(const std::vector<FitResult>& fits,
                                           const EnergyLedger& ledger,
                                           const FirmRegistry& registry, const YearWindow& window,
                                           Diagnostics& diag);

struct LogitCoefficient {
  std::string predictor;
  double beta = 0.0;
  double se = 0.0;  // robust
  double aor = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double p_value = 1.0;
  std::string stars;
};

struct SectorLogit {
  std::string sector;
  std::size_t n = 0;
  bool converged = false;
  std::string warning;
  double intercept = 0.0;
  std::vector<LogitCoefficient> coefficients;
};

struct LogitSettings {
  std::size_t min_observations = 30;
  LogitOptions solver;
  double z = 1.96;
  double step = 0.1;  // predictor change in log units behind each odds ratio
};

/// Odds ratio for a 10% predictor increase, e^{0.1 beta}.
double odds_ratio(double beta, double step = 0.1);

std::string significance_stars(double p);

/// "0.915*** [0.902, 0.929]"
std::string format_aor(const LogitCoefficient& c);

/// Fits one sector; returns nullopt (with `skip_reason`) when it has too few
/// observations or only one outcome class.
std::optional<SectorLogit> fit_sector(const std::string& sector,
                                      std::span<const FirmFeatures> firms,
                                      const LogitSettings& settings,
                                      std::string* skip_reason = nullptr);

struct ClassificationResult {
  std::vector<SectorLogit> sectors;
  std::map<std::string, std::string> skipped;  // sector -> reason
};

ClassificationResult classify_sectors(const std::vector<FirmFeatures>& firms,
                                      const LogitSettings& settings, unsigned threads,
                                      Diagnostics& diag);

void write_logit_results(const std::filesystem::path& path, const ClassificationResult& result);
void write_features(const std::filesystem::path& path, const std::vector<FirmFeatures>& firms);

}  // namespace tlens
