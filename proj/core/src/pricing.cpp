#include "transition_lens/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "transition_lens/csv.hpp"

namespace tlens {

namespace {

std::string describe(Carrier c, Period p) {
  std::ostringstream os;
  os << to_string(c) << ' ' << p.year << '-' << to_string(p.semester);
  return os.str();
}

}  // namespace

PriceTable::PriceTable(Carrier carrier, Period period, std::vector<PriceBand> bands)
    : carrier_(carrier), period_(period), bands_(std::move(bands)) {
  const auto where = describe(carrier_, period_);
  if (bands_.empty()) throw ConfigError("price table " + where + " has no bands");
  if (bands_.front().lower_kwh != 0.0)
    throw ConfigError("price table " + where + ": first band must start at 0 kWh");
  thresholds_.reserve(bands_.size());
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    const auto& band = bands_[b];
    if (!(band.price > 0.0) || !std::isfinite(band.price))
      throw ConfigError("price table " + where + ": band " + std::to_string(b) +
                        " has non-positive price");
    if (b > 0 && !(band.lower_kwh > bands_[b - 1].lower_kwh))
      throw ConfigError("price table " + where + ": band bounds not strictly ascending");
    thresholds_.push_back(band.lower_kwh * band.price);
    if (b > 0 && !(thresholds_[b] > thresholds_[b - 1]))
      throw ConfigError("price table " + where + ": monetary thresholds not monotone at band " +
                        std::to_string(b));
  }
}

std::size_t PriceTable::assign_band(double expenditure) const {
  const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), expenditure);
  return it == thresholds_.begin() ? 0 : static_cast<std::size_t>(it - thresholds_.begin()) - 1;
}

double PriceTable::to_kwh(double expenditure) const {
  if (expenditure == 0.0) return 0.0;
  return expenditure / bands_[assign_band(expenditure)].price;
}

std::size_t assign_band(double expenditure, const PriceTable& table) {
  return table.assign_band(expenditure);
}

double to_kwh(double expenditure, const PriceTable& table) { return table.to_kwh(expenditure); }

double weighted_fuel_price(const FuelPrices& fp) {
  return fp.diesel_weight * fp.diesel + (1.0 - fp.diesel_weight) * fp.gasoline;
}

PriceTable oil_table(const FuelPrices& fp) {
  return PriceTable(Carrier::Oil, fp.period, {{0.0, weighted_fuel_price(fp)}});
}

PriceTable mean_table(const PriceTable& h1, const PriceTable& h2) {
  if (h1.bands().size() != h2.bands().size())
    throw ConfigError("cannot average price tables with different band counts (" +
                      describe(h1.carrier(), h1.period()) + ")");
  std::vector<PriceBand> bands;
  for (std::size_t b = 0; b < h1.bands().size(); ++b) {
    if (h1.bands()[b].lower_kwh != h2.bands()[b].lower_kwh)
      throw ConfigError("cannot average price tables with different band bounds (" +
                        describe(h1.carrier(), h1.period()) + ")");
    bands.push_back({h1.bands()[b].lower_kwh, 0.5 * (h1.bands()[b].price + h2.bands()[b].price)});
  }
  return PriceTable(h1.carrier(), h1.period(), std::move(bands));
}

void PriceBook::add(PriceTable table) {
  const auto key = std::make_pair(table.carrier(), table.period());
  if (tables_.contains(key))
    throw ConfigError("duplicate price table " + describe(key.first, key.second));
  tables_.emplace(key, std::move(table));
}

void PriceBook::add(const FuelPrices& fuel) {
  if (!(fuel.diesel > 0.0) || !(fuel.gasoline > 0.0))
    throw ConfigError("fuel prices must be positive (" + describe(Carrier::Oil, fuel.period) + ")");
  if (!(fuel.diesel_weight >= 0.0 && fuel.diesel_weight <= 1.0))
    throw ConfigError("diesel weight outside [0,1] (" + describe(Carrier::Oil, fuel.period) + ")");
  add(oil_table(fuel));
  fuel_.push_back(fuel);
}

bool PriceBook::has(Carrier c, Period p) const { return tables_.contains({c, p}); }

const PriceTable& PriceBook::table(Carrier c, Period p) const {
  const auto it = tables_.find({c, p});
  if (it == tables_.end()) throw InputError("no price table for " + describe(c, p));
  return it->second;
}

PriceTable PriceBook::annual_table(Carrier c, int year) const {
  return mean_table(table(c, {year, Semester::H1}), table(c, {year, Semester::H2}));
}

PriceBook PriceBook::read(const std::filesystem::path& prices, const std::filesystem::path& fuel) {
  PriceBook book;
  {
    const auto t = csv::Table::read(prices);
    const auto c_car = t.column("carrier");
    const auto c_year = t.column("year");
    const auto c_sem = t.column("semester");
    const auto c_low = t.column("band_lower_kwh");
    const auto c_price = t.column("price_huf_per_kwh");
    std::map<std::pair<Carrier, Period>, std::vector<PriceBand>> rows;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      Carrier c;
      Period p;
      try {
        c = parse_carrier(t.cell(r, c_car));
        p = {t.integer(r, c_year), parse_semester(t.cell(r, c_sem))};
      } catch (const InputError& e) {
        throw SchemaError(t.source(), "", t.source() + ": row " + std::to_string(r + 2) + ": " + e.what());
      }
      if (c == Carrier::Oil)
        throw SchemaError(t.source(), "carrier", t.source() + ": oil prices belong in fuel_prices.csv");
      rows[{c, p}].push_back({t.number(r, c_low), t.number(r, c_price)});
    }
    for (auto& [key, bands] : rows) {
      std::sort(bands.begin(), bands.end(),
                [](const PriceBand& a, const PriceBand& b) { return a.lower_kwh < b.lower_kwh; });
      book.add(PriceTable(key.first, key.second, std::move(bands)));
    }
  }
  {
    const auto t = csv::Table::read(fuel);
    const auto c_year = t.column("year");
    const auto c_sem = t.column("semester");
    const auto c_d = t.column("diesel_huf_per_kwh");
    const auto c_g = t.column("gasoline_huf_per_kwh");
    const auto c_w = t.find_column("diesel_weight");
    for (std::size_t r = 0; r < t.rows(); ++r) {
      FuelPrices fp;
      try {
        fp.period = {t.integer(r, c_year), parse_semester(t.cell(r, c_sem))};
      } catch (const InputError& e) {
        throw SchemaError(t.source(), "semester", t.source() + ": " + e.what());
      }
      fp.diesel = t.number(r, c_d);
      fp.gasoline = t.number(r, c_g);
      if (c_w)
        if (auto w = t.optional_number(r, *c_w)) fp.diesel_weight = *w;
      book.add(fp);
    }
  }
  return book;
}

void PriceBook::write(const std::filesystem::path& prices, const std::filesystem::path& fuel) const {
  {
    csv::Writer w(prices, {"carrier", "year", "semester", "band_lower_kwh", "price_huf_per_kwh"});
    for (const auto& [key, table] : tables_) {
      if (key.first == Carrier::Oil) continue;
      for (const auto& band : table.bands()) {
        w << to_string(key.first) << key.second.year << to_string(key.second.semester)
          << band.lower_kwh << band.price;
        w.end_row();
      }
    }
  }
  csv::Writer w(fuel, {"year", "semester", "diesel_huf_per_kwh", "gasoline_huf_per_kwh",
                       "diesel_weight"});
  for (const auto& fp : fuel_) {
    w << fp.period.year << to_string(fp.period.semester) << fp.diesel << fp.gasoline
      << fp.diesel_weight;
    w.end_row();
  }
}

EnergyLedger annualize(const PurchaseLedger& purchases, const FirmRegistry& registry,
                       const PriceBook& prices, const YearWindow& window, Diagnostics& diag) {
  EnergyLedger ledger;
  std::map<std::pair<Carrier, int>, PriceTable> annual_cache;
  auto annual = [&](Carrier c, int year) -> const PriceTable& {
    auto it = annual_cache.find({c, year});
    if (it == annual_cache.end())
      it = annual_cache.emplace(std::make_pair(c, year), prices.annual_table(c, year)).first;
    return it->second;
  };

  std::set<FirmId> buyers;
  for (const auto& [key, amount] : purchases)
    if (window.contains(key.period.year)) buyers.insert(key.firm);

  for (const auto& id : buyers) {
    const auto* meta = registry.find(id);
    if (!meta) {
      diag.warn("unresolved-firm", id + " has purchases but no registry entry");
      continue;
    }
    for (int y : window.years()) {
      auto& fy = ledger.at(id, y);
      for (Carrier c : kCarriers) {
        const double h1 = purchased(purchases, id, {y, Semester::H1}, c);
        const double h2 = purchased(purchases, id, {y, Semester::H2}, c);
        fy.huf[index(c)] = h1 + h2;
        if (meta->reporting == Reporting::Annual) {
          const double total = h1 + h2;
          fy.kwh[index(c)] = total > 0.0 ? annual(c, y).to_kwh(total) : 0.0;
        } else {
          double kwh = 0.0;
          if (h1 > 0.0) kwh += prices.table(c, {y, Semester::H1}).to_kwh(h1);
          if (h2 > 0.0) kwh += prices.table(c, {y, Semester::H2}).to_kwh(h2);
          fy.kwh[index(c)] = kwh;
        }
      }
    }
  }
  return ledger;
}

}  // namespace tlens
