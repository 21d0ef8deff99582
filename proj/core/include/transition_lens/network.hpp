#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "transition_lens/ingest.hpp"
#include "transition_lens/metrics.hpp"

namespace tlens {

enum class PartnerSide { Suppliers, Customers };

std::string_view to_string(PartnerSide side);

/// Directed supplier -> buyer graph over a fixed member set, built from the
/// union of transactions inside the observation window.
class SupplyNetwork {
 public:
  static SupplyNetwork build(std::span<const TransactionRecord> records,
                             const std::set<FirmId>& members, const YearWindow& window);

  [[nodiscard]] std::size_t size() const { return ids_.size(); }
  [[nodiscard]] std::size_t edge_count() const;
  [[nodiscard]] const FirmId& id(std::size_t node) const { return ids_[node]; }
  [[nodiscard]] std::optional<std::size_t> node(const FirmId& id) const;
  [[nodiscard]] const std::vector<std::size_t>& customers(std::size_t node) const { return out_[node]; }
  [[nodiscard]] const std::vector<std::size_t>& suppliers(std::size_t node) const { return in_[node]; }

  /// Nodes at shortest directed distance exactly `tier` from `node`; suppliers
  /// walk edges backwards (upstream), customers forwards.
  [[nodiscard]] std::vector<std::size_t> tier(std::size_t node, int tier, PartnerSide side) const;

 private:
  std::vector<FirmId> ids_;
  std::unordered_map<FirmId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

struct CorrelationPair {
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::size_t n = 0;        // firms entering the correlation
  std::size_t skipped = 0;  // firms with no partners at the tier
};

struct PartnerCorrelation {
  int tier = 1;
  PartnerSide side = PartnerSide::Suppliers;
  CorrelationPair trend;         // mean partner delta vs own delta
  CorrelationPair status_share;  // share of transitioning partners vs own status
};

PartnerCorrelation partner_trend_correlation(const SupplyNetwork& network,
                                             const std::vector<FitResult>& fits, int tier,
                                             PartnerSide side);

void write_partner_correlations(const std::filesystem::path& path,
                                const std::vector<PartnerCorrelation>& rows);

}  // namespace tlens
