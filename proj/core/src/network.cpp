#include "transition_lens/network.hpp"

#include <algorithm>

#include "transition_lens/csv.hpp"
#include "transition_lens/stats.hpp"

namespace tlens {

std::string_view to_string(PartnerSide side) {
  return side == PartnerSide::Suppliers ? "suppliers" : "customers";
}

SupplyNetwork SupplyNetwork::build(std::span<const TransactionRecord> records,
                                   const std::set<FirmId>& members, const YearWindow& window) {
  SupplyNetwork net;
  for (const auto& id : members) {
    net.index_.emplace(id, net.ids_.size());
    net.ids_.push_back(id);
  }
  net.out_.resize(net.ids_.size());
  net.in_.resize(net.ids_.size());
  for (const auto& r : records) {
    if (!window.contains(r.period.year)) continue;
    const auto s = net.index_.find(r.supplier);
    const auto b = net.index_.find(r.buyer);
    if (s == net.index_.end() || b == net.index_.end() || s->second == b->second) continue;
    net.out_[s->second].push_back(b->second);
    net.in_[b->second].push_back(s->second);
  }
  for (auto* adj : {&net.out_, &net.in_})
    for (auto& v : *adj) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  return net;
}

std::size_t SupplyNetwork::edge_count() const {
  std::size_t n = 0;
  for (const auto& v : out_) n += v.size();
  return n;
}

std::optional<std::size_t> SupplyNetwork::node(const FirmId& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? std::nullopt : std::optional(it->second);
}

std::vector<std::size_t> SupplyNetwork::tier(std::size_t node, int tier, PartnerSide side) const {
  const auto& adj = side == PartnerSide::Customers ? out_ : in_;
  std::vector<int> dist(ids_.size(), -1);
  dist[node] = 0;
  std::vector<std::size_t> frontier{node};
  for (int d = 1; d <= tier && !frontier.empty(); ++d) {
    std::vector<std::size_t> next;
    for (auto u : frontier)
      for (auto v : adj[u])
        if (dist[v] < 0) {
          dist[v] = d;
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  std::vector<std::size_t> out;
  if (tier >= 1)
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (dist[v] == tier) out.push_back(v);
  return out;
}

PartnerCorrelation partner_trend_correlation(const SupplyNetwork& network,
                                             const std::vector<FitResult>& fits, int tier,
                                             PartnerSide side) {
  if (tier < 1) throw InputError("partner tier must be >= 1");
  std::vector<std::optional<double>> delta(network.size());
  std::vector<std::optional<double>> status(network.size());
  for (const auto& f : fits) {
    const auto n = network.node(f.id);
    if (!n) continue;
    delta[*n] = f.delta();
    if (const auto s = transition_status(f))
      status[*n] = *s == TransitionStatus::Transitioning ? 1.0 : 0.0;
  }

  PartnerCorrelation result{tier, side, {}, {}};
  std::vector<double> own_d, mean_d, own_s, share_s;
  for (std::size_t v = 0; v < network.size(); ++v) {
    if (!delta[v] && !status[v]) continue;
    const auto partners = network.tier(v, tier, side);
    if (delta[v]) {
      double sum = 0.0;
      std::size_t k = 0;
      for (auto p : partners)
        if (delta[p]) {
          sum += *delta[p];
          ++k;
        }
      if (k == 0) {
        ++result.trend.skipped;
      } else {
        own_d.push_back(*delta[v]);
        mean_d.push_back(sum / static_cast<double>(k));
      }
    }
    if (status[v]) {
      double sum = 0.0;
      std::size_t k = 0;
      for (auto p : partners)
        if (status[p]) {
          sum += *status[p];
          ++k;
        }
      if (k == 0) {
        ++result.status_share.skipped;
      } else {
        own_s.push_back(*status[v]);
        share_s.push_back(sum / static_cast<double>(k));
      }
    }
  }
  result.trend.n = own_d.size();
  result.trend.pearson = stats::pearson(own_d, mean_d);
  result.trend.spearman = stats::spearman(own_d, mean_d);
  result.status_share.n = own_s.size();
  result.status_share.pearson = stats::pearson(own_s, share_s);
  result.status_share.spearman = stats::spearman(own_s, share_s);
  return result;
}

void write_partner_correlations(const std::filesystem::path& path,
                                const std::vector<PartnerCorrelation>& rows) {
  csv::Writer w(path, {"tier", "side", "metric", "pearson", "spearman", "n", "skipped"});
  auto put = [&](const PartnerCorrelation& r, std::string_view metric, const CorrelationPair& c) {
    w << r.tier << to_string(r.side) << metric;
    if (c.pearson) w << *c.pearson;
    else w << std::string_view("");
    if (c.spearman) w << *c.spearman;
    else w << std::string_view("");
    w << c.n << c.skipped;
    w.end_row();
  };
  for (const auto& r : rows) {
    put(r, "mean_partner_delta", r.trend);
    put(r, "transitioning_partner_share", r.status_share);
  }
}

}  // namespace tlens
