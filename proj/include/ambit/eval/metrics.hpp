#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/stats.hpp"

namespace ambit::eval {

struct Metrics {
  std::size_t n = 0;
  double mae = 0;
  double rmse = 0;
  std::optional<double> r2;  // empty when the observed values are constant
  double smape = 0;
  double cpc = 0;
};

inline double cpc(std::span<const double> y, std::span<const double> yhat) {
  double common = 0, sy = 0, sp = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::max(0.0, yhat[i]);
    common += std::min(y[i], p);
    sy += y[i];
    sp += p;
  }
  return sy + sp > 0 ? 2.0 * common / (sy + sp) : 0.0;
}

// Predictions are clipped at zero before every metric.
inline Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw Error("metric inputs differ in length");
  if (y.empty()) throw EmptyTaskError("metrics need at least one row");
  Metrics m;
  m.n = y.size();
  const double n = static_cast<double>(y.size());
  double abs_sum = 0, sq_sum = 0, smape_sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::max(0.0, yhat[i]);
    const double e = y[i] - p;
    abs_sum += std::abs(e);
    sq_sum += e * e;
    const double den = std::abs(y[i]) + std::abs(p);
    if (den > 0) smape_sum += 2.0 * std::abs(e) / den;
  }
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  m.smape = smape_sum / n;
  const double ybar = mean(y);
  double sst = 0;
  for (double v : y) sst += (v - ybar) * (v - ybar);
  if (sst > 0) m.r2 = 1.0 - sq_sum / sst;
  m.cpc = cpc(y, yhat);
  return m;
}

inline std::vector<double> observed(std::span<const od::FlowRow> rows) {
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = static_cast<double>(rows[i].flow);
  return y;
}

// Unweighted mean of per-hour CPC over hours present in `rows`.
inline double cpc_hour_averaged(std::span<const od::FlowRow> rows, std::span<const double> yhat) {
  if (rows.size() != yhat.size()) throw Error("metric inputs differ in length");
  std::map<od::HourStamp, std::pair<std::vector<double>, std::vector<double>>> by_hour;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& [y, p] = by_hour[rows[i].hour];
    y.push_back(static_cast<double>(rows[i].flow));
    p.push_back(yhat[i]);
  }
  if (by_hour.empty()) return 0.0;
  double s = 0;
  for (const auto& [h, yp] : by_hour) s += cpc(yp.first, yp.second);
  return s / static_cast<double>(by_hour.size());
}

struct QuantileBin {
  std::string label;
  double lower = 0;  // exclusive, except for the first bin
  double upper = 0;  // inclusive
  std::vector<std::size_t> rows;
  Metrics metrics;
};

struct QuantileDiagnostics {
  std::vector<double> edges;  // interior edges, right-closed
  std::vector<QuantileBin> bins;
  bool degenerate = false;
};

// Bins are type-7 quantiles of the observed flow; bin k covers (e_{k-1}, e_k].
inline QuantileDiagnostics quantile_diagnostics(std::span<const double> y,
                                                std::span<const double> yhat, int n_bins = 3) {
  if (n_bins < 2) throw ConfigError("quantile diagnostics need at least 2 bins");
  if (y.empty()) throw EmptyTaskError("quantile diagnostics need at least one row");
  QuantileDiagnostics q;
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  for (int k = 1; k < n_bins; ++k) {
    const double e = quantile_sorted(sorted, static_cast<double>(k) / n_bins);
    if (e < sorted.back() && (q.edges.empty() || e > q.edges.back())) q.edges.push_back(e);
  }
  q.degenerate = q.edges.empty();
  const std::size_t nb = q.edges.size() + 1;
  q.bins.resize(nb);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::lower_bound(q.edges.begin(), q.edges.end(), y[i]) - q.edges.begin());
    q.bins[b].rows.push_back(i);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    auto& bin = q.bins[b];
    bin.label = "Q" + std::to_string(b + 1);
    bin.lower = b == 0 ? sorted.front() : q.edges[b - 1];
    bin.upper = b + 1 == nb ? sorted.back() : q.edges[b];
    if (bin.rows.empty()) continue;
    std::vector<double> yy, pp;
    for (auto i : bin.rows) {
      yy.push_back(y[i]);
      pp.push_back(yhat[i]);
    }
    bin.metrics = compute_metrics(yy, pp);
  }
  return q;
}

struct ZoneError {
  od::ZoneIndex zone = 0;
  std::size_t n = 0;
  double mae = 0;
  double smape = 0;
};

// Per-row errors averaged by origin zone.
inline std::vector<ZoneError> zone_errors(std::span<const od::FlowRow> rows,
                                          std::span<const double> yhat) {
  std::map<od::ZoneIndex, ZoneError> acc;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = static_cast<double>(rows[i].flow), p = std::max(0.0, yhat[i]);
    auto& z = acc[rows[i].origin];
    z.zone = rows[i].origin;
    ++z.n;
    z.mae += std::abs(y - p);
    if (y + p > 0) z.smape += 2.0 * std::abs(y - p) / (y + p);
  }
  std::vector<ZoneError> out;
  for (auto& [k, z] : acc) {
    z.mae /= static_cast<double>(z.n);
    z.smape /= static_cast<double>(z.n);
    out.push_back(z);
  }
  return out;
}

}  // namespace ambit::eval
