#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/od/filter.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/random.hpp"
#include "ambit/util/stats.hpp"

namespace ambit::od {

enum class Sampling { random, stratified_by_flow };

struct SplitSpec {
  HourStamp train_end = 0;
  HourStamp val_end = 0;
  HourStamp test_end = 0;
  Sampling sampling = Sampling::random;
  std::size_t max_train_rows = kUnlimited;
  std::size_t max_eval_rows = kUnlimited;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(train_end < val_end && val_end < test_end))
      throw ConfigError("split requires train_end < val_end < test_end");
  }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

namespace detail {

// Largest-remainder allocation of k samples across strata sized `sizes`.
inline std::vector<std::size_t> proportional_allocation(const std::vector<std::size_t>& sizes,
                                                        std::size_t k) {
  std::size_t n = 0;
  for (auto s : sizes) n += s;
  std::vector<std::size_t> alloc(sizes.size(), 0);
  if (n == 0) return alloc;
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t used = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const double exact = static_cast<double>(k) * static_cast<double>(sizes[b]) / static_cast<double>(n);
    alloc[b] = std::min(sizes[b], static_cast<std::size_t>(std::floor(exact)));
    used += alloc[b];
    rema.emplace_back(exact - std::floor(exact), b);
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < k && i < rema.size(); ++i) {
    const auto b = rema[i].second;
    if (alloc[b] < sizes[b]) {
      ++alloc[b];
      ++used;
    }
  }
  return alloc;
}

// Decile bin of log1p(flow) per row, right-closed edges.
inline std::vector<std::size_t> flow_deciles(const FlowTable& flows,
                                             const std::vector<std::size_t>& window) {
  std::vector<double> v;
  v.reserve(window.size());
  for (auto i : window) v.push_back(std::log1p(static_cast<double>(flows[i].flow)));
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int q = 1; q < 10; ++q) edges.push_back(quantile_sorted(sorted, q / 10.0));
  std::vector<std::size_t> bin(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    bin[i] = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v[i]) -
                                      edges.begin());
  return bin;
}

inline std::vector<std::size_t> sample_window(const FlowTable& flows,
                                              const std::vector<std::size_t>& window,
                                              std::size_t max_rows, Sampling sampling,
                                              Rng& rng) {
  if (window.size() <= max_rows) return window;
  if (sampling == Sampling::random) {
    auto pick = sample_without_replacement(window.size(), max_rows, rng);
    std::vector<std::size_t> out;
    out.reserve(pick.size());
    for (auto p : pick) out.push_back(window[p]);
    return out;
  }
  const auto bins = flow_deciles(flows, window);
  std::vector<std::vector<std::size_t>> strata(10);
  for (std::size_t i = 0; i < window.size(); ++i) strata[bins[i]].push_back(window[i]);
  std::vector<std::size_t> sizes;
  for (const auto& s : strata) sizes.push_back(s.size());
  const auto alloc = proportional_allocation(sizes, max_rows);
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < strata.size(); ++b) {
    auto pick = sample_without_replacement(strata[b].size(), alloc[b], rng);
    for (auto p : pick) out.push_back(strata[b][p]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Rows are partitioned by hour: train < train_end <= val < val_end <= test < test_end.
inline SplitIndices split_and_sample(const FlowTable& flows, const SplitSpec& spec) {
  spec.validate();
  SplitIndices out;
  std::vector<std::size_t> train, val, test;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto h = flows[i].hour;
    if (h < spec.train_end) train.push_back(i);
    else if (h < spec.val_end) val.push_back(i);
    else if (h < spec.test_end) test.push_back(i);
  }
  if (train.empty()) throw EmptyTaskError("training window has zero rows");
  if (val.empty()) throw EmptyTaskError("validation window has zero rows");
  if (test.empty()) throw EmptyTaskError("test window has zero rows");
  Rng rng(derive_seed(spec.seed, 11));
  out.train = detail::sample_window(flows, train, spec.max_train_rows, spec.sampling, rng);
  out.val = detail::sample_window(flows, val, spec.max_eval_rows, spec.sampling, rng);
  out.test = detail::sample_window(flows, test, spec.max_eval_rows, spec.sampling, rng);
  return out;
}

}  // namespace ambit::od
