#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>

#include "transition_lens/common.hpp"

namespace tlens {

/// Annual energy use and spend of one firm, per carrier.
struct FirmYear {
  std::array<double, 3> kwh{};
  std::array<double, 3> huf{};

  [[nodiscard]] double total_kwh() const { return kwh[0] + kwh[1] + kwh[2]; }
  [[nodiscard]] double electricity_kwh() const { return kwh[index(Carrier::Electricity)]; }
  [[nodiscard]] double fossil_huf() const {
    return huf[index(Carrier::Gas)] + huf[index(Carrier::Oil)];
  }
};

/// Per firm, per year energy consumption in kWh (with the underlying spend).
class EnergyLedger {
 public:
  using Years = std::map<int, FirmYear>;

  FirmYear& at(const FirmId& firm, int year) { return firms_[firm][year]; }
  [[nodiscard]] const Years* find(const FirmId& firm) const;
  [[nodiscard]] const std::map<FirmId, Years>& firms() const { return firms_; }
  [[nodiscard]] std::size_t size() const { return firms_.size(); }

  [[nodiscard]] EnergyLedger restricted(const std::set<FirmId>& keep) const;

  void write(const std::filesystem::path& path) const;
  static EnergyLedger read(const std::filesystem::path& path);

 private:
  std::map<FirmId, Years> firms_;
};

}  // namespace tlens
