#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/attribution/treeshap.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/format.hpp"
#include "ambit/util/stats.hpp"

namespace ambit::attribution {

struct FeatureSummary {
  std::string feature;
  double mean_abs = 0;
  double mean = 0;
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
};

inline std::vector<double> mean_abs_contributions(const Attributions& a) {
  std::vector<double> m(a.feature_names.size(), 0.0);
  for (const auto& r : a.rows)
    for (std::size_t f = 0; f < m.size(); ++f) m[f] += std::abs(r.contributions[f]);
  for (auto& v : m) v /= static_cast<double>(std::max<std::size_t>(1, a.rows.size()));
  return m;
}

// Sorted by mean |contribution| descending, ties in feature order.
inline std::vector<FeatureSummary> global_summary(const Attributions& a) {
  if (a.rows.empty()) throw Error("global summary needs at least one attribution row");
  std::vector<FeatureSummary> out;
  for (std::size_t f = 0; f < a.feature_names.size(); ++f) {
    std::vector<double> c;
    c.reserve(a.rows.size());
    double abs_sum = 0;
    for (const auto& r : a.rows) {
      c.push_back(r.contributions[f]);
      abs_sum += std::abs(r.contributions[f]);
    }
    std::sort(c.begin(), c.end());
    FeatureSummary s;
    s.feature = a.feature_names[f];
    s.mean_abs = abs_sum / static_cast<double>(c.size());
    s.mean = mean(c);
    s.q05 = quantile_sorted(c, 0.05);
    s.q25 = quantile_sorted(c, 0.25);
    s.q50 = quantile_sorted(c, 0.50);
    s.q75 = quantile_sorted(c, 0.75);
    s.q95 = quantile_sorted(c, 0.95);
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureSummary& x, const FeatureSummary& y) { return x.mean_abs > y.mean_abs; });
  return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<FeatureSummary>& s) {
  out << "rank,feature,mean_abs,mean,q05,q25,q50,q75,q95\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& r = s[i];
    out << i + 1 << ',' << csv_escape(r.feature) << ',' << fmt_num(r.mean_abs) << ','
        << fmt_num(r.mean) << ',' << fmt_num(r.q05) << ',' << fmt_num(r.q25) << ','
        << fmt_num(r.q50) << ',' << fmt_num(r.q75) << ',' << fmt_num(r.q95) << '\n';
  }
}

// Long format for beeswarm rendering.
inline void write_attributions_csv(std::ostream& out, const Attributions& a,
                                   std::span<const std::size_t> row_ids = {}) {
  out << "row_id,feature,value,contribution\n";
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    const std::size_t id = row_ids.empty() ? r : row_ids[r];
    for (std::size_t f = 0; f < a.feature_names.size(); ++f)
      out << id << ',' << csv_escape(a.feature_names[f]) << ',' << fmt_num(a.values.at(r, f))
          << ',' << fmt_num(a.rows[r].contributions[f]) << '\n';
  }
}

enum class WaterfallSelector { max_abs_error, max_flow, max_distance };

inline const char* to_string(WaterfallSelector s) {
  switch (s) {
    case WaterfallSelector::max_abs_error: return "max_abs_error";
    case WaterfallSelector::max_flow: return "max_flow";
    case WaterfallSelector::max_distance: return "max_distance";
  }
  return "?";
}

// Per explained row: observed flow, final prediction and distance.
struct WaterfallFrame {
  std::vector<double> observed;
  std::vector<double> predicted;
  std::vector<double> distance;
};

struct WaterfallRecord {
  WaterfallSelector selector;
  std::size_t row = 0;
  double base_value = 0;
  std::vector<std::pair<std::string, double>> contributions;  // by |value| descending
  double prediction_link = 0;
  double observed = 0;
  double predicted = 0;
};

inline std::size_t argmax_first(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::vector<WaterfallRecord> waterfall_examples(const Attributions& a,
                                                       const WaterfallFrame& frame) {
  const std::size_t n = a.rows.size();
  if (n == 0) throw Error("waterfall selection needs a non-empty frame");
  if (frame.observed.size() != n || frame.predicted.size() != n || frame.distance.size() != n)
    throw Error("waterfall frame does not match the attribution rows");
  std::vector<double> err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = std::abs(frame.observed[i] - frame.predicted[i]);
  std::vector<WaterfallRecord> out;
  for (auto sel : {WaterfallSelector::max_abs_error, WaterfallSelector::max_flow,
                   WaterfallSelector::max_distance}) {
    const std::size_t r = sel == WaterfallSelector::max_abs_error ? argmax_first(err)
                          : sel == WaterfallSelector::max_flow    ? argmax_first(frame.observed)
                                                                  : argmax_first(frame.distance);
    WaterfallRecord rec;
    rec.selector = sel;
    rec.row = r;
    rec.base_value = a.rows[r].base_value;
    rec.prediction_link = a.rows[r].prediction;
    rec.observed = frame.observed[r];
    rec.predicted = frame.predicted[r];
    std::vector<std::size_t> order(a.feature_names.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& c = a.rows[r].contributions;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::abs(c[x]) > std::abs(c[y]); });
    for (auto f : order) rec.contributions.emplace_back(a.feature_names[f], c[f]);
    out.push_back(std::move(rec));
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<WaterfallRecord>& recs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : recs) {
    nlohmann::json contrib = nlohmann::json::array();
    for (const auto& [f, v] : r.contributions) contrib.push_back({{"feature", f}, {"contribution", v}});
    out.push_back({{"selector", to_string(r.selector)}, {"row", r.row}, {"base_value", r.base_value},
                   {"contributions", contrib}, {"prediction_link", r.prediction_link},
                   {"observed", r.observed}, {"predicted", r.predicted}});
  }
  return out;
}

struct RankStabilityReport {
  std::string early_window;
  std::string late_window;
  std::vector<std::string> features;
  std::vector<double> early_mean_abs;
  std::vector<double> late_mean_abs;
  double spearman_rho = 1.0;
  bool degenerate = false;
};

inline RankStabilityReport rank_stability(const Attributions& early, const Attributions& late) {
  if (early.rows.empty() || late.rows.empty()) throw Error("rank stability needs two non-empty windows");
  if (early.feature_names != late.feature_names) throw Error("rank stability windows use different features");
  RankStabilityReport rep;
  rep.features = early.feature_names;
  rep.early_mean_abs = mean_abs_contributions(early);
  rep.late_mean_abs = mean_abs_contributions(late);
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (rep.features.size() < 2 || (constant(rep.early_mean_abs) && constant(rep.late_mean_abs))) {
    rep.degenerate = true;
    rep.spearman_rho = 1.0;
    return rep;
  }
  if (constant(rep.early_mean_abs) || constant(rep.late_mean_abs)) {
    rep.degenerate = true;
    rep.spearman_rho = 0.0;
    return rep;
  }
  rep.spearman_rho = spearman(rep.early_mean_abs, rep.late_mean_abs);
  return rep;
}

}  // namespace ambit::attribution
