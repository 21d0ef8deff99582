#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace tlens {

/// One year of PV capacity, generation and demand inputs.
struct PvYearRecord {
  int year = 0;
  double c_scte_mw = 0.0;          // industrial self-consumption capacity
  double c_hmke_total_mw = 0.0;    // household-scale capacity, all owners
  double c_hmke_res_mw = 0.0;      // household-scale capacity, residential
  double cf = 0.0;                 // capacity factor, fraction
  double g_mekh_gwh = 0.0;         // total gross PV generation
  double f_total_gwh = 0.0;        // final electricity consumption
  double f_res_gwh = 0.0;          // residential final consumption
  // Optional published values to compare against.
  std::optional<double> ref_g_scte_gwh;
  std::optional<double> ref_g_hmke_com_gwh;
  std::optional<double> ref_s_com;

  /// Throws InputError when an invariant is violated.
  void validate() const;
};

/// capacity [MW] x cf x 8760 h, in GWh.
double annual_generation(double capacity_mw, double cf);

/// (s_pv_com, s_com): commercial self-consumption as a share of total PV
/// generation and of commercial electricity demand.
std::pair<double, double> selfconsumption_shares(const PvYearRecord& record);

struct PvEstimate {
  int year = 0;
  double c_hmke_com_mw = 0.0;
  double g_scte_gwh = 0.0;
  double g_hmke_com_gwh = 0.0;
  double g_sc_com_gwh = 0.0;
  double s_pv_com = 0.0;
  double f_com_gwh = 0.0;
  double s_com = 0.0;
  // Relative deviation from the reference column, when one was given.
  std::optional<double> dev_g_scte;
  std::optional<double> dev_g_hmke_com;
  std::optional<double> dev_s_com;
  bool flag_g_scte = false;
  bool flag_g_hmke_com = false;
  bool flag_s_com = false;
};

/// Computes every derived column strictly from the formulas and flags
/// reference columns that deviate by more than `tolerance` (relative).
PvEstimate estimate_pv(const PvYearRecord& record, double tolerance = 0.005);

std::vector<PvYearRecord> read_pv_inputs(const std::filesystem::path& path);
void write_pv_estimates(const std::filesystem::path& path, const std::vector<PvEstimate>& rows);

}  // namespace tlens
