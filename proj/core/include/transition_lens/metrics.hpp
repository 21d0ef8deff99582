#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "transition_lens/common.hpp"
#include "transition_lens/ledger.hpp"
#include "transition_lens/robust_fit.hpp"

namespace tlens {

enum class MixProvenance { Measured, Forecast };

/// Low-carbon share u(t) of the national electricity mix.
class GridMixSeries {
 public:
  struct Point {
    double u = 0.0;
    MixProvenance provenance = MixProvenance::Measured;
  };

  /// Throws InputError when u is outside [0, 1].
  void set(int year, double u, MixProvenance provenance = MixProvenance::Measured);
  [[nodiscard]] double u(int year) const;
  [[nodiscard]] bool has(int year) const { return points_.contains(year); }
  [[nodiscard]] const std::map<int, Point>& points() const { return points_; }
  [[nodiscard]] std::map<int, double> measured() const;

  static GridMixSeries read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

 private:
  std::map<int, Point> points_;
};

struct SharePoint {
  double e = 0.0;  // electricity share of total energy
  double l = 0.0;  // low-carbon share, e * u
};

struct ShareSeries {
  FirmId id;
  std::map<int, SharePoint> values;

  [[nodiscard]] YearSeries electrification() const;
  [[nodiscard]] YearSeries low_carbon() const;
};

/// Shares per firm. Firm-years with zero total energy are skipped with a
/// warning; a missing u(t) for a ledger year is an InputError.
std::vector<ShareSeries> low_carbon_shares(const EnergyLedger& ledger, const GridMixSeries& mix,
                                           Diagnostics& diag);

struct FitResult {
  FirmId id;
  std::optional<LineFit> linear;            // l(t): alpha, delta
  std::optional<LineFit> exponential;       // ln l(t): gamma, lambda
  std::optional<LineFit> elec_linear;       // e(t): intercept, epsilon
  std::optional<LineFit> elec_exponential;  // ln e(t): intercept, mu
  std::optional<double> delta_ols;
  std::optional<double> lambda_ols;
  std::string note;  // first fit error, if any

  [[nodiscard]] std::optional<double> delta() const;
  [[nodiscard]] std::optional<double> lambda() const;
  [[nodiscard]] std::optional<double> epsilon() const;
  [[nodiscard]] std::optional<double> mu() const;
  /// beta = e^gamma, the exponential level at the base year.
  [[nodiscard]] std::optional<double> beta() const;
};

struct ElectrificationFits {
  std::optional<LineFit> linear;
  std::optional<LineFit> exponential;
};

/// Fits run on e(t), which is free of the grid-mix effect embedded in l(t).
ElectrificationFits electrification_fits(const ShareSeries& share, const HuberOptions& opts = {});

/// All four robust fits plus the OLS comparison slopes for one firm. Fit
/// failures leave the corresponding member empty and set `note`.
FitResult fit_firm(const ShareSeries& share, const HuberOptions& opts = {});

std::vector<FitResult> fit_all(const std::vector<ShareSeries>& shares, const HuberOptions& opts,
                               unsigned threads, Diagnostics& diag);

enum class TransitionStatus { Transitioning, NonTransitioning };

std::string_view to_string(TransitionStatus s);

/// Transitioning iff delta > 0 and lambda > 0. nullopt when a fit is missing.
std::optional<TransitionStatus> transition_status(const FitResult& fit);

void write_fits(const std::filesystem::path& path, const std::vector<FitResult>& fits);
std::vector<FitResult> read_fits(const std::filesystem::path& path);

void write_shares(const std::filesystem::path& path, const std::vector<ShareSeries>& shares);

}  // namespace tlens
