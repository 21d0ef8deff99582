#include "transition_lens/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "transition_lens/csv.hpp"

namespace tlens {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool parse_flag(std::string_view text) {
  const auto t = lower(text);
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no" || t.empty()) return false;
  throw InputError("not a boolean: '" + std::string(text) + "'");
}

std::optional<int> year_suffix(std::string_view name, std::string_view prefix) {
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  try {
    return csv::parse_int(name.substr(prefix.size()));
  } catch (const InputError&) {
    return std::nullopt;
  }
}

constexpr std::array<std::string_view, 9> kReasonNames{
    "missing-sector",           "energy-provider",   "financial-sector",
    "excluded-activity",        "ets-member",        "discontinuous-electricity",
    "discontinuous-gas",        "missing-revenue",   "outlier",
};

}  // namespace

std::string_view to_string(Reporting r) {
  return r == Reporting::Annual ? "annual" : "semiannual";
}

Reporting parse_reporting(std::string_view text) {
  const auto t = lower(text);
  if (t == "annual" || t == "a") return Reporting::Annual;
  if (t == "semiannual" || t == "semi-annual" || t == "s" || t.empty())
    return Reporting::Semiannual;
  throw InputError("unknown reporting regime '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- registry

void FirmRegistry::add(FirmMeta firm) {
  for (const auto& [year, v] : firm.revenue)
    if (!(v >= 0.0)) throw InputError("firm " + firm.id + ": negative revenue in " + std::to_string(year));
  for (const auto& [year, v] : firm.employees)
    if (!(v >= 0.0))
      throw InputError("firm " + firm.id + ": negative employees in " + std::to_string(year));
  auto id = firm.id;
  if (!firms_.emplace(id, std::move(firm)).second) throw InputError("duplicate firm id " + id);
}

const FirmMeta* FirmRegistry::find(const FirmId& id) const {
  const auto it = firms_.find(id);
  return it == firms_.end() ? nullptr : &it->second;
}

void FirmRegistry::declare_years(std::set<int> revenue, std::set<int> employees) {
  revenue_years_ = std::move(revenue);
  employee_years_ = std::move(employees);
}

FirmRegistry FirmRegistry::read(const std::filesystem::path& path, Diagnostics& diag) {
  const auto t = csv::Table::read(path);
  const auto c_id = t.column("id");
  const auto c_nace = t.column("nace4");
  const auto c_ets = t.column("ets_member");
  const auto c_rep = t.column("reporting");

  std::vector<std::pair<int, std::size_t>> rev_cols, emp_cols;
  std::set<int> rev_years, emp_years;
  for (std::size_t c = 0; c < t.header().size(); ++c) {
    if (auto y = year_suffix(t.header()[c], "revenue_")) {
      rev_cols.emplace_back(*y, c);
      rev_years.insert(*y);
    } else if (auto y2 = year_suffix(t.header()[c], "employees_")) {
      emp_cols.emplace_back(*y2, c);
      emp_years.insert(*y2);
    }
  }

  FirmRegistry reg;
  reg.declare_years(rev_years, emp_years);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    FirmMeta m;
    m.id = std::string(t.cell(r, c_id));
    if (m.id.empty()) throw SchemaError(t.source(), "id", t.source() + ": empty firm id");
    const auto nace = t.cell(r, c_nace);
    if (!nace.empty()) {
      try {
        m.nace = NaceCode::parse(nace);
      } catch (const InputError& e) {
        diag.warn("malformed-nace", m.id + ": " + e.what());
      }
    }
    try {
      m.ets_member = parse_flag(t.cell(r, c_ets));
      m.reporting = parse_reporting(t.cell(r, c_rep));
    } catch (const InputError& e) {
      throw SchemaError(t.source(), "", t.source() + ": row " + std::to_string(r + 2) + ": " + e.what());
    }
    for (const auto& [year, c] : rev_cols)
      if (auto v = t.optional_number(r, c)) m.revenue[year] = *v;
    for (const auto& [year, c] : emp_cols)
      if (auto v = t.optional_number(r, c)) m.employees[year] = *v;
    reg.add(std::move(m));
  }
  return reg;
}

void FirmRegistry::write(const std::filesystem::path& path) const {
  std::vector<std::string> header{"id", "nace4", "ets_member", "reporting"};
  for (int y : revenue_years_) header.push_back("revenue_" + std::to_string(y));
  for (int y : employee_years_) header.push_back("employees_" + std::to_string(y));
  csv::Writer w(path, header);
  for (const auto& [id, m] : firms_) {
    w << std::string_view(id) << std::string_view(m.nace ? m.nace->dotted() : std::string{})
      << m.ets_member << to_string(m.reporting);
    for (int y : revenue_years_) {
      const auto it = m.revenue.find(y);
      if (it == m.revenue.end()) w << std::string_view("");
      else w << it->second;
    }
    for (int y : employee_years_) {
      const auto it = m.employees.find(y);
      if (it == m.employees.end()) w << std::string_view("");
      else w << it->second;
    }
    w.end_row();
  }
}

// ---------------------------------------------------------------- providers

ProviderLists ProviderLists::defaults() {
  return from_codes({{
      {"D35.1", "D35.1.1", "D35.1.2", "D35.1.3", "D35.1.4"},
      {"D35.2.1", "D35.2.2", "D35.2.3"},
      {"B6.1.0", "C19.2.0", "G47.3.0", "G46.7.1"},
  }});
}

ProviderLists ProviderLists::from_codes(const std::array<std::vector<std::string>, 3>& codes) {
  ProviderLists lists;
  for (std::size_t c = 0; c < 3; ++c)
    for (const auto& code : codes[c]) lists.codes_[c].insert(NaceCode::parse(code).dotted());
  return lists;
}

bool ProviderLists::is_provider(const NaceCode& code) const {
  return std::any_of(codes_.begin(), codes_.end(),
                     [&](const auto& set) { return set.contains(code.dotted()); });
}

CarrierSet classify_provider(const NaceCode& code, const ProviderLists& lists) {
  CarrierSet out;
  for (Carrier c : kCarriers)
    if (lists.codes(c).contains(code.dotted())) out.insert(c);
  return out;
}

CarrierSet classify_provider(std::string_view nace4, const ProviderLists& lists) {
  return classify_provider(NaceCode::parse(nace4), lists);
}

// ---------------------------------------------------------------- transactions

std::vector<TransactionRecord> read_transactions(const std::filesystem::path& path,
                                                 Diagnostics& diag) {
  const auto t = csv::Table::read(path);
  const auto c_sup = t.column("supplier_id");
  const auto c_buy = t.column("buyer_id");
  const auto c_year = t.column("year");
  const auto c_sem = t.column("semester");
  const auto c_amt = t.column("amount_huf");

  std::vector<TransactionRecord> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    TransactionRecord rec;
    rec.supplier = std::string(t.cell(r, c_sup));
    rec.buyer = std::string(t.cell(r, c_buy));
    rec.period.year = t.integer(r, c_year);
    try {
      rec.period.semester = parse_semester(t.cell(r, c_sem));
    } catch (const InputError& e) {
      throw SchemaError(t.source(), "semester",
                        t.source() + ": row " + std::to_string(r + 2) + ": " + e.what());
    }
    rec.amount = t.number(r, c_amt);
    if (!std::isfinite(rec.amount)) {
      throw SchemaError(t.source(), "amount_huf",
                        t.source() + ": row " + std::to_string(r + 2) + ": non-finite amount");
    }
    if (rec.supplier == rec.buyer) {
      diag.warn("self-loop", "row " + std::to_string(r + 2) + " supplier equals buyer " + rec.buyer);
      continue;
    }
    if (rec.amount < 0.0) {
      diag.warn("negative-amount", "row " + std::to_string(r + 2) + " clamped to 0");
      rec.amount = 0.0;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_transactions(const std::filesystem::path& path,
                        std::span<const TransactionRecord> records) {
  csv::Writer w(path, {"supplier_id", "buyer_id", "year", "semester", "amount_huf"});
  for (const auto& r : records) {
    w << std::string_view(r.supplier) << std::string_view(r.buyer) << r.period.year
      << to_string(r.period.semester) << r.amount;
    w.end_row();
  }
}

double purchased(const PurchaseLedger& ledger, const FirmId& firm, Period period, Carrier c) {
  const auto it = ledger.find(PurchaseKey{firm, period, c});
  return it == ledger.end() ? 0.0 : it->second;
}

PurchaseLedger aggregate_purchases(std::span<const TransactionRecord> records,
                                   const FirmRegistry& registry, const ProviderLists& lists,
                                   Diagnostics& diag) {
  std::unordered_map<FirmId, CarrierSet> supplier_carriers;
  for (const auto& [id, meta] : registry.firms())
    if (meta.nace) {
      auto carriers = classify_provider(*meta.nace, lists);
      if (!carriers.empty()) supplier_carriers.emplace(id, std::move(carriers));
    }

  PurchaseLedger ledger;
  for (const auto& rec : records) {
    if (!registry.find(rec.supplier) || !registry.find(rec.buyer)) {
      diag.warn("unresolved-firm", rec.supplier + " -> " + rec.buyer);
      continue;
    }
    const auto it = supplier_carriers.find(rec.supplier);
    if (it == supplier_carriers.end()) continue;
    for (Carrier c : it->second) ledger[PurchaseKey{rec.buyer, rec.period, c}] += rec.amount;
  }
  return ledger;
}

// ---------------------------------------------------------------- filters

std::string_view to_string(ExclusionReason r) { return kReasonNames[static_cast<std::size_t>(r)]; }

ExclusionReason parse_exclusion_reason(std::string_view text) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i)
    if (kReasonNames[i] == text) return static_cast<ExclusionReason>(i);
  throw InputError("unknown exclusion reason '" + std::string(text) + "'");
}

void FirmSample::write_exclusions(const std::filesystem::path& path) const {
  csv::Writer w(path, {"id", "reason_code"});
  for (const auto& [id, reason] : excluded) {
    w << std::string_view(id) << to_string(reason);
    w.end_row();
  }
}

namespace {

struct FilterContext {
  const PurchaseLedger& purchases;
  const EnergyLedger& kwh;
  const FilterSettings& settings;
  const ProviderLists& lists;
  const std::set<int>& revenue_years;
};

bool positive_every_year(const FilterContext& ctx, const FirmId& id, Carrier c) {
  for (int y : ctx.settings.window.years()) {
    const double amount = purchased(ctx.purchases, id, {y, Semester::H1}, c) +
                          purchased(ctx.purchases, id, {y, Semester::H2}, c);
    if (!(amount > 0.0)) return false;
  }
  return true;
}

bool is_outlier(const FilterContext& ctx, const FirmId& id) {
  const auto* years = ctx.kwh.find(id);
  if (!years) return false;
  const double r = ctx.settings.outlier_ratio;
  for (Carrier c : kCarriers) {
    for (int y = ctx.settings.window.first; y < ctx.settings.window.last; ++y) {
      const auto a = years->find(y);
      const auto b = years->find(y + 1);
      if (a == years->end() || b == years->end()) continue;
      const double prev = a->second.kwh[index(c)];
      const double next = b->second.kwh[index(c)];
      if (!(prev > 0.0) || !(next > 0.0)) continue;
      const double ratio = next / prev;
      if (ratio >= r || ratio <= 1.0 / r) return true;
    }
  }
  return false;
}

// True when the firm fails the predicate.
bool fails(ExclusionReason which, const FilterContext& ctx, const FirmMeta& m) {
  switch (which) {
    case ExclusionReason::MissingSector:
      return !m.nace.has_value();
    case ExclusionReason::EnergyProvider:
      return m.nace && ctx.lists.is_provider(*m.nace);
    case ExclusionReason::FinancialSector:
      return m.nace && ctx.settings.excluded_sections.contains(m.nace->section());
    case ExclusionReason::ExcludedActivity:
      return m.nace && ctx.settings.excluded_codes.contains(m.nace->dotted());
    case ExclusionReason::EtsMember:
      return m.ets_member;
    case ExclusionReason::DiscontinuousElectricity:
      return !positive_every_year(ctx, m.id, Carrier::Electricity);
    case ExclusionReason::DiscontinuousGas:
      return !positive_every_year(ctx, m.id, Carrier::Gas);
    case ExclusionReason::MissingRevenue:
      for (int y : ctx.revenue_years)
        if (!m.revenue.contains(y)) return true;
      return false;
    case ExclusionReason::Outlier:
      return is_outlier(ctx, m.id);
  }
  return false;
}

}  // namespace

FirmSample apply_sample_filters(const PurchaseLedger& purchases, const FirmRegistry& registry,
                                const EnergyLedger& kwh, const FilterSettings& settings,
                                const ProviderLists& lists,
                                std::span<const ExclusionReason> order) {
  if (settings.window.empty()) throw InputError("empty observation window");

  // Revenue must be present for every window year that has a revenue column.
  std::set<int> revenue_years;
  for (int y : registry.revenue_years())
    if (settings.window.contains(y)) revenue_years.insert(y);
  if (registry.revenue_years().empty())
    for (int y : settings.window.years()) revenue_years.insert(y);

  const FilterContext ctx{purchases, kwh, settings, lists, revenue_years};
  FirmSample sample;
  for (const auto& [id, meta] : registry.firms()) {
    std::optional<ExclusionReason> reason;
    for (auto which : order) {
      if (fails(which, ctx, meta)) {
        reason = which;
        break;
      }
    }
    if (reason) sample.excluded.emplace(id, *reason);
    else sample.included.insert(id);
  }
  return sample;
}

}  // namespace tlens
