#include "transition_lens/pv.hpp"

#include <cmath>

#include "transition_lens/common.hpp"
#include "transition_lens/csv.hpp"

namespace tlens {

namespace {

constexpr double kHoursPerYear = 8760.0;

std::optional<double> relative_dev(double computed, const std::optional<double>& ref) {
  if (!ref) return std::nullopt;
  if (*ref == 0.0) return computed == 0.0 ? 0.0 : INFINITY;
  return std::fabs(computed - *ref) / std::fabs(*ref);
}

}  // namespace

void PvYearRecord::validate() const {
  const auto where = "PV inputs " + std::to_string(year) + ": ";
  if (c_scte_mw < 0.0 || c_hmke_total_mw < 0.0 || c_hmke_res_mw < 0.0)
    throw InputError(where + "negative capacity");
  if (c_hmke_res_mw > c_hmke_total_mw)
    throw InputError(where + "residential HMKE capacity exceeds total");
  if (!(cf > 0.0 && cf < 1.0)) throw InputError(where + "capacity factor outside (0,1)");
  if (!(g_mekh_gwh > 0.0)) throw InputError(where + "total PV generation must be positive");
  if (!(f_total_gwh > f_res_gwh)) throw InputError(where + "commercial demand must be positive");
}

double annual_generation(double capacity_mw, double cf) {
  return capacity_mw * cf * kHoursPerYear / 1000.0;
}

std::pair<double, double> selfconsumption_shares(const PvYearRecord& r) {
  r.validate();
  const double c_hmke_com = r.c_hmke_total_mw - r.c_hmke_res_mw;
  const double g_sc_com = annual_generation(r.c_scte_mw, r.cf) + annual_generation(c_hmke_com, r.cf);
  return {g_sc_com / r.g_mekh_gwh, g_sc_com / (r.f_total_gwh - r.f_res_gwh)};
}

PvEstimate estimate_pv(const PvYearRecord& r, double tolerance) {
  r.validate();
  PvEstimate e;
  e.year = r.year;
  e.c_hmke_com_mw = r.c_hmke_total_mw - r.c_hmke_res_mw;
  e.g_scte_gwh = annual_generation(r.c_scte_mw, r.cf);
  e.g_hmke_com_gwh = annual_generation(e.c_hmke_com_mw, r.cf);
  e.g_sc_com_gwh = e.g_scte_gwh + e.g_hmke_com_gwh;
  e.s_pv_com = e.g_sc_com_gwh / r.g_mekh_gwh;
  e.f_com_gwh = r.f_total_gwh - r.f_res_gwh;
  e.s_com = e.g_sc_com_gwh / e.f_com_gwh;

  e.dev_g_scte = relative_dev(e.g_scte_gwh, r.ref_g_scte_gwh);
  e.dev_g_hmke_com = relative_dev(e.g_hmke_com_gwh, r.ref_g_hmke_com_gwh);
  e.dev_s_com = relative_dev(e.s_com, r.ref_s_com);
  e.flag_g_scte = e.dev_g_scte && *e.dev_g_scte > tolerance;
  e.flag_g_hmke_com = e.dev_g_hmke_com && *e.dev_g_hmke_com > tolerance;
  e.flag_s_com = e.dev_s_com && *e.dev_s_com > tolerance;
  return e;
}

std::vector<PvYearRecord> read_pv_inputs(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  const auto c_year = t.column("year");
  const auto c_scte = t.column("c_scte_mw");
  const auto c_tot = t.column("c_hmke_total_mw");
  const auto c_res = t.column("c_hmke_res_mw");
  const auto c_cf = t.column("cf");
  const auto c_mekh = t.column("g_mekh_gwh");
  const auto c_ft = t.column("f_total_gwh");
  const auto c_fr = t.column("f_res_gwh");
  const auto c_rs = t.find_column("ref_g_scte_gwh");
  const auto c_rh = t.find_column("ref_g_hmke_com_gwh");
  const auto c_rc = t.find_column("ref_s_com");

  std::vector<PvYearRecord> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    PvYearRecord rec;
    rec.year = t.integer(r, c_year);
    rec.c_scte_mw = t.number(r, c_scte);
    rec.c_hmke_total_mw = t.number(r, c_tot);
    rec.c_hmke_res_mw = t.number(r, c_res);
    rec.cf = t.number(r, c_cf);
    rec.g_mekh_gwh = t.number(r, c_mekh);
    rec.f_total_gwh = t.number(r, c_ft);
    rec.f_res_gwh = t.number(r, c_fr);
    if (c_rs) rec.ref_g_scte_gwh = t.optional_number(r, *c_rs);
    if (c_rh) rec.ref_g_hmke_com_gwh = t.optional_number(r, *c_rh);
    if (c_rc) rec.ref_s_com = t.optional_number(r, *c_rc);
    try {
      rec.validate();
    } catch (const InputError& e) {
      throw SchemaError(t.source(), "", t.source() + ": " + e.what());
    }
    out.push_back(rec);
  }
  return out;
}

void write_pv_estimates(const std::filesystem::path& path, const std::vector<PvEstimate>& rows) {
  csv::Writer w(path, {"year", "c_hmke_com_mw", "g_scte_gwh", "g_hmke_com_gwh", "g_sc_com_gwh",
                       "s_pv_com", "f_com_gwh", "s_com", "dev_g_scte", "dev_g_hmke_com",
                       "dev_s_com", "flag_g_scte", "flag_g_hmke_com", "flag_s_com"});
  auto put = [&](const std::optional<double>& v) {
    if (v) w << *v;
    else w << std::string_view("");
  };
  for (const auto& e : rows) {
    w << e.year << e.c_hmke_com_mw << e.g_scte_gwh << e.g_hmke_com_gwh << e.g_sc_com_gwh
      << e.s_pv_com << e.f_com_gwh << e.s_com;
    put(e.dev_g_scte);
    put(e.dev_g_hmke_com);
    put(e.dev_s_com);
    w << e.flag_g_scte << e.flag_g_hmke_com << e.flag_s_com;
    w.end_row();
  }
}

}  // namespace tlens
