#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "transition_lens/common.hpp"
#include "transition_lens/ledger.hpp"
#include "transition_lens/nace.hpp"

namespace tlens {

enum class Reporting { Semiannual, Annual };

std::string_view to_string(Reporting r);
Reporting parse_reporting(std::string_view text);

struct FirmMeta {
  FirmId id;
  std::optional<NaceCode> nace;
  std::map<int, double> revenue;
  std::map<int, double> employees;
  Reporting reporting = Reporting::Semiannual;
  bool ets_member = false;
};

class FirmRegistry {
 public:
  /// Throws InputError on duplicate ids or negative revenue/employees.
  void add(FirmMeta firm);

  [[nodiscard]] const FirmMeta* find(const FirmId& id) const;
  [[nodiscard]] const std::map<FirmId, FirmMeta>& firms() const { return firms_; }
  [[nodiscard]] std::size_t size() const { return firms_.size(); }

  /// Years for which the input carried a revenue column.
  [[nodiscard]] const std::set<int>& revenue_years() const { return revenue_years_; }
  [[nodiscard]] const std::set<int>& employee_years() const { return employee_years_; }
  void declare_years(std::set<int> revenue, std::set<int> employees);

  /// Reads `firms.csv` (id, nace4, ets_member, reporting, revenue_YYYY...,
  /// employees_YYYY...). Malformed sector codes are warned and left empty.
  static FirmRegistry read(const std::filesystem::path& path, Diagnostics& diag);
  void write(const std::filesystem::path& path) const;

 private:
  std::map<FirmId, FirmMeta> firms_;
  std::set<int> revenue_years_;
  std::set<int> employee_years_;
};

/// NACE codes identifying providers of each carrier. Codes are matched exactly
/// after canonicalisation.
class ProviderLists {
 public:
  static ProviderLists defaults();
  static ProviderLists from_codes(const std::array<std::vector<std::string>, 3>& codes);

  [[nodiscard]] const std::set<std::string>& codes(Carrier c) const { return codes_[index(c)]; }
  [[nodiscard]] bool is_provider(const NaceCode& code) const;

 private:
  std::array<std::set<std::string>, 3> codes_;
};

using CarrierSet = std::set<Carrier>;

CarrierSet classify_provider(const NaceCode& code, const ProviderLists& lists);
CarrierSet classify_provider(std::string_view nace4, const ProviderLists& lists);

struct TransactionRecord {
  FirmId supplier;
  FirmId buyer;
  Period period;
  double amount = 0.0;
};

/// Reads `transactions.csv`. Negative amounts are clamped to zero and
/// self-loops dropped, each with a counted warning.
std::vector<TransactionRecord> read_transactions(const std::filesystem::path& path,
                                                 Diagnostics& diag);
void write_transactions(const std::filesystem::path& path,
                        std::span<const TransactionRecord> records);

struct PurchaseKey {
  FirmId firm;
  Period period;
  Carrier carrier = Carrier::Electricity;

  auto operator<=>(const PurchaseKey&) const = default;
};

/// Monetary energy purchases per (buyer, semester, carrier). Absent keys are zero.
using PurchaseLedger = std::map<PurchaseKey, double>;

double purchased(const PurchaseLedger& ledger, const FirmId& firm, Period period, Carrier c);

PurchaseLedger aggregate_purchases(std::span<const TransactionRecord> records,
                                   const FirmRegistry& registry, const ProviderLists& lists,
                                   Diagnostics& diag);

enum class ExclusionReason {
  MissingSector,
  EnergyProvider,
  FinancialSector,
  ExcludedActivity,
  EtsMember,
  DiscontinuousElectricity,
  DiscontinuousGas,
  MissingRevenue,
  Outlier,
};

std::string_view to_string(ExclusionReason r);
ExclusionReason parse_exclusion_reason(std::string_view text);

inline constexpr std::array<ExclusionReason, 9> kFilterOrder{
    ExclusionReason::MissingSector,       ExclusionReason::EnergyProvider,
    ExclusionReason::FinancialSector,     ExclusionReason::ExcludedActivity,
    ExclusionReason::EtsMember,           ExclusionReason::DiscontinuousElectricity,
    ExclusionReason::DiscontinuousGas,    ExclusionReason::MissingRevenue,
    ExclusionReason::Outlier,
};

struct FilterSettings {
  YearWindow window;
  std::set<char> excluded_sections{'K'};
  std::set<std::string> excluded_codes{"H52.2.1"};
  /// Year-over-year kWh ratio (or its inverse) at which a firm is an outlier.
  double outlier_ratio = 1000.0;
};

struct FirmSample {
  std::set<FirmId> included;
  std::map<FirmId, ExclusionReason> excluded;

  void write_exclusions(const std::filesystem::path& path) const;
};

/// Applies the sample-construction predicates in `order`; a firm is excluded
/// by the first predicate it fails. `kwh` feeds the outlier screen.
FirmSample apply_sample_filters(const PurchaseLedger& purchases, const FirmRegistry& registry,
                                const EnergyLedger& kwh, const FilterSettings& settings,
                                const ProviderLists& lists,
                                std::span<const ExclusionReason> order = kFilterOrder);

}  // namespace tlens
