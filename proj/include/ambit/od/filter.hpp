#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/util/error.hpp"

namespace ambit::od {

using OdPair = std::pair<ZoneIndex, ZoneIndex>;

// Sorted set of OD pairs.
class PairSet {
 public:
  PairSet() = default;
  explicit PairSet(std::vector<OdPair> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  }
  bool contains(ZoneIndex o, ZoneIndex d) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), OdPair{o, d});
  }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<OdPair>& pairs() const { return pairs_; }

 private:
  std::vector<OdPair> pairs_;
};

struct FilterStats {
  std::size_t pairs = 0;
  std::int64_t total_flow = 0;
  std::size_t rows = 0;
};

struct FilterResult {
  FlowTable flows;
  PairSet pairs;
  FilterStats stats;
};

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

// Pair totals use rows strictly before train_end only; survivors need a
// total >= min_total and rank within the top_k (ties by (origin, dest)).
inline FilterResult filter_od_pairs(const FlowTable& flows, std::int64_t min_total,
                                    std::size_t top_k, HourStamp train_end) {
  if (min_total < 0) throw ConfigError("min_total must be >= 0");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  std::map<OdPair, std::int64_t> totals;
  for (const auto& r : flows)
    if (r.hour < train_end) totals[{r.origin, r.dest}] += r.flow;

  std::vector<std::pair<OdPair, std::int64_t>> ranked;
  for (const auto& [p, t] : totals)
    if (t >= min_total) ranked.emplace_back(p, t);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > top_k) ranked.resize(top_k);
  if (ranked.empty())
    throw EmptyTaskError("no OD pair survives filtering (min_total=" + std::to_string(min_total) +
                         ", top_k=" + std::to_string(top_k) + ")");

  std::vector<OdPair> keep;
  keep.reserve(ranked.size());
  for (const auto& [p, t] : ranked) keep.push_back(p);
  FilterResult res;
  res.pairs = PairSet(std::move(keep));

  std::vector<FlowRow> rows;
  for (const auto& r : flows)
    if (res.pairs.contains(r.origin, r.dest)) rows.push_back(r);
  res.flows = FlowTable(std::move(rows));
  res.stats.pairs = res.pairs.size();
  res.stats.rows = res.flows.size();
  res.stats.total_flow = res.flows.total_flow();
  return res;
}

}  // namespace ambit::od
