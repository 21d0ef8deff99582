#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "transition_lens/ingest.hpp"
#include "transition_lens/ledger.hpp"
#include "transition_lens/metrics.hpp"
#include "transition_lens/nace.hpp"
#include "transition_lens/robust_fit.hpp"

namespace tlens {

/// OLS line through the measured u(t) inside `fit_years`, extended to
/// `horizon`. Forecast values are clamped to [0, 1] and stay at 1 once they
/// reach it. Measured points are carried over unchanged.
GridMixSeries forecast_grid_mix(const GridMixSeries& observed, const YearWindow& fit_years,
                                int horizon);

enum class TrendMode { Linear, Exponential };

enum class ScenarioKind { BauLinear, BauExponential, TransitionLinear, TransitionExponential };

inline constexpr std::array<ScenarioKind, 4> kScenarioKinds{
    ScenarioKind::BauLinear, ScenarioKind::BauExponential, ScenarioKind::TransitionLinear,
    ScenarioKind::TransitionExponential};

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view text);
TrendMode mode_of(ScenarioKind kind);
bool is_transition(ScenarioKind kind);

/// Electrification trajectory. Linear: e = intercept + slope (t - base);
/// exponential: e = exp(intercept + slope (t - base)). Both unclamped.
struct ElectrificationPath {
  TrendMode mode = TrendMode::Linear;
  double intercept = 0.0;
  double slope = 0.0;
  int base_year = 0;

  [[nodiscard]] double raw(int year) const;
  /// Same slope/rate as `slope`, passing through this path's value at `year`.
  [[nodiscard]] ElectrificationPath reanchored(int year, double slope) const;
};

std::optional<ElectrificationPath> path_from_fit(const std::optional<LineFit>& fit, TrendMode mode);

struct FirmPoint {
  double e = 0.0;   // electrification share, clamped to [0, 1]
  double l = 0.0;   // low-carbon share e * u
  double ef = 0.0;  // fossil-fired electricity share e * (1 - u)
  double ff = 0.0;  // non-electric (fossil) share 1 - e
};

std::map<int, FirmPoint> forecast_firm(const ElectrificationPath& path, const GridMixSeries& mix,
                                       int first_year, int last_year);

struct AggregatePoint {
  int year = 0;
  double l = 0.0;
  double ef = 0.0;
  double ff = 0.0;
  double f = 1.0;  // 1 - l
  bool measured = false;
};

struct WeightedForecast {
  double weight = 0.0;  // mean total energy of the firm
  const std::map<int, FirmPoint>* path = nullptr;
};

/// Energy-weighted aggregation of firm forecasts. Throws InputError for an
/// empty firm set or a non-positive weight.
std::vector<AggregatePoint> aggregate(std::span<const WeightedForecast> firms);

/// Firm-level inputs to the scenario engine.
struct ScenarioFirm {
  FirmId id;
  NaceCode nace;
  double mean_total_kwh = 0.0;
  double log_revenue = 0.0;    // matching coordinate
  double log_employees = 0.0;  // matching coordinate
  std::map<int, std::pair<double, double>> observed;  // year -> (E, T) kWh
  std::optional<LineFit> elec_linear;
  std::optional<LineFit> elec_exponential;

  [[nodiscard]] const std::optional<LineFit>& fit(TrendMode mode) const {
    return mode == TrendMode::Linear ? elec_linear : elec_exponential;
  }
};

struct MatchSettings {
  YearWindow revenue_years{2020, 2023};
  YearWindow employee_years{2020, 2022};
};

std::vector<ScenarioFirm> build_scenario_firms(const std::vector<FitResult>& fits,
                                               const EnergyLedger& ledger,
                                               const FirmRegistry& registry,
                                               const YearWindow& window,
                                               const MatchSettings& match, Diagnostics& diag);

enum class MatchLevel { Nace4, Nace2, None };

std::string_view to_string(MatchLevel level);

struct Match {
  FirmId donor;  // empty for MatchLevel::None
  MatchLevel level = MatchLevel::None;
  double distance = 0.0;
};

using MatchAssignment = std::map<FirmId, Match>;

/// Nearest positive-trend peer for each recipient: same NACE-4 first, then
/// the same NACE-2 division. Distance is Euclidean on (ln revenue,
/// ln employees); ties go to the smallest donor id.
MatchAssignment match_donors(std::span<const ScenarioFirm> recipients,
                             std::span<const ScenarioFirm> pool, TrendMode mode);

struct ScenarioInputs {
  std::vector<ScenarioFirm> firms;
  GridMixSeries mix;  // measured and forecast through the horizon
  YearWindow window;
  int horizon = 2050;
  bool reanchor = true;
};

struct AggregateScenario {
  ScenarioKind kind = ScenarioKind::BauLinear;
  std::vector<AggregatePoint> points;
  std::map<FirmId, std::map<int, FirmPoint>> firm_paths;
  MatchAssignment matches;
  std::size_t dropped = 0;  // firms without the fit this mode needs

  [[nodiscard]] const AggregatePoint& at(int year) const;
};

AggregateScenario run_scenario(ScenarioKind kind, const ScenarioInputs& inputs);

/// One member of the uncertainty run set; `excluded_year` empty for the main run.
struct RunSpec {
  std::optional<int> excluded_year;
};

/// "all" (main plus every single-year exclusion), "main", an integer N (main
/// plus the first N exclusions), or a comma list such as "main,2021,2023".
std::vector<RunSpec> parse_run_set(std::string_view spec, const YearWindow& window);

struct EnvelopePoint {
  int year = 0;
  double main = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct UncertaintyEnvelope {
  ScenarioKind kind = ScenarioKind::BauLinear;
  std::vector<EnvelopePoint> points;
  std::vector<RunSpec> runs;            // runs that contributed
  std::vector<std::string> skipped;     // runs dropped, with reason
};

/// Refits every firm's electrification trend with each run's year removed,
/// reruns the scenario, and records per-year min/max of l(t) together with
/// the main run.
UncertaintyEnvelope uncertainty_envelope(ScenarioKind kind, const ScenarioInputs& inputs,
                                         std::span<const RunSpec> runs,
                                         const HuberOptions& huber, unsigned threads,
                                         Diagnostics& diag);

void write_scenario(const std::filesystem::path& path, const AggregateScenario& scenario,
                    const UncertaintyEnvelope* envelope, const GridMixSeries& mix);
void write_matches(const std::filesystem::path& path, const MatchAssignment& matches);

}  // namespace tlens
