#pragma once

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "transition_lens/common.hpp"
#include "transition_lens/ingest.hpp"
#include "transition_lens/ledger.hpp"

namespace tlens {

struct PriceBand {
  double lower_kwh = 0.0;
  double price = 0.0;  // HUF/kWh
};

/// Consumption-banded unit prices for one carrier in one semester.
///
/// A band's monetary threshold is its lower kWh bound priced at the band's own
/// price. Construction rejects tables whose monetary thresholds are not
/// strictly increasing, since band assignment would then be ambiguous.
class PriceTable {
 public:
  PriceTable(Carrier carrier, Period period, std::vector<PriceBand> bands);

  [[nodiscard]] Carrier carrier() const { return carrier_; }
  [[nodiscard]] Period period() const { return period_; }
  [[nodiscard]] const std::vector<PriceBand>& bands() const { return bands_; }
  [[nodiscard]] double monetary_threshold(std::size_t band) const { return thresholds_.at(band); }

  [[nodiscard]] std::size_t assign_band(double expenditure) const;
  [[nodiscard]] double to_kwh(double expenditure) const;

 private:
  Carrier carrier_;
  Period period_;
  std::vector<PriceBand> bands_;
  std::vector<double> thresholds_;
};

std::size_t assign_band(double expenditure, const PriceTable& table);
double to_kwh(double expenditure, const PriceTable& table);

struct FuelPrices {
  Period period;
  double diesel = 0.0;    // HUF/kWh
  double gasoline = 0.0;  // HUF/kWh
  double diesel_weight = 0.74;
};

double weighted_fuel_price(const FuelPrices& fp);

/// Single-band oil table priced at the weighted fuel price.
PriceTable oil_table(const FuelPrices& fp);

/// Table whose band prices are the arithmetic mean of two semester tables
/// with identical band bounds; used for annual reporters.
PriceTable mean_table(const PriceTable& h1, const PriceTable& h2);

class PriceBook {
 public:
  void add(PriceTable table);
  void add(const FuelPrices& fuel);

  /// Throws InputError when no table exists for (carrier, period).
  [[nodiscard]] const PriceTable& table(Carrier c, Period p) const;
  [[nodiscard]] bool has(Carrier c, Period p) const;
  [[nodiscard]] PriceTable annual_table(Carrier c, int year) const;
  [[nodiscard]] const std::map<std::pair<Carrier, Period>, PriceTable>& tables() const {
    return tables_;
  }
  [[nodiscard]] const std::vector<FuelPrices>& fuel() const { return fuel_; }

  /// Reads `prices.csv` and `fuel_prices.csv`.
  static PriceBook read(const std::filesystem::path& prices, const std::filesystem::path& fuel);
  void write(const std::filesystem::path& prices, const std::filesystem::path& fuel) const;

 private:
  std::map<std::pair<Carrier, Period>, PriceTable> tables_;
  std::vector<FuelPrices> fuel_;
};

/// Converts semester purchases into annual kWh per firm and carrier.
///
/// Semiannual reporters convert each semester with that semester's table and
/// sum; annual reporters convert the yearly total with the mean table. Every
/// firm with any purchase gets an entry for every window year.
EnergyLedger annualize(const PurchaseLedger& purchases, const FirmRegistry& registry,
                       const PriceBook& prices, const YearWindow& window, Diagnostics& diag);

}  // namespace tlens
