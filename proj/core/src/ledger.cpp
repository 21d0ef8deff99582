#include "transition_lens/ledger.hpp"

#include "transition_lens/csv.hpp"

namespace tlens {

const EnergyLedger::Years* EnergyLedger::find(const FirmId& firm) const {
  const auto it = firms_.find(firm);
  return it == firms_.end() ? nullptr : &it->second;
}

EnergyLedger EnergyLedger::restricted(const std::set<FirmId>& keep) const {
  EnergyLedger out;
  for (const auto& [id, years] : firms_)
    if (keep.contains(id)) out.firms_.emplace(id, years);
  return out;
}

void EnergyLedger::write(const std::filesystem::path& path) const {
  csv::Writer w(path, {"id", "year", "electricity_kwh", "gas_kwh", "oil_kwh", "electricity_huf",
                       "gas_huf", "oil_huf"});
  for (const auto& [id, years] : firms_) {
    for (const auto& [year, fy] : years) {
      w << std::string_view(id) << year;
      for (double v : fy.kwh) w << v;
      for (double v : fy.huf) w << v;
      w.end_row();
    }
  }
}

EnergyLedger EnergyLedger::read(const std::filesystem::path& path) {
  const auto t = csv::Table::read(path);
  const auto c_id = t.column("id");
  const auto c_year = t.column("year");
  const std::array<std::size_t, 3> c_kwh{t.column("electricity_kwh"), t.column("gas_kwh"),
                                         t.column("oil_kwh")};
  const std::array<std::size_t, 3> c_huf{t.column("electricity_huf"), t.column("gas_huf"),
                                         t.column("oil_huf")};
  EnergyLedger ledger;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto& fy = ledger.at(std::string(t.cell(r, c_id)), t.integer(r, c_year));
    for (std::size_t c = 0; c < 3; ++c) {
      fy.kwh[c] = t.number(r, c_kwh[c]);
      fy.huf[c] = t.number(r, c_huf[c]);
    }
  }
  return ledger;
}

}  // namespace tlens
