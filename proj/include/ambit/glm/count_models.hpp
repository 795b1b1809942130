#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/glm/design.hpp"
#include "ambit/glm/irls.hpp"
#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/util/random.hpp"

namespace ambit::glm {

// Moment dispersion a = sum((y-mu)^2 - mu) / sum(mu^2), then one refit with
// NB working weights mu / (1 + a mu).
inline GlmFit fit_negbin(const GlmDesign& d, std::span<const double> y,
                         double tol = kIrlsTolerance) {
  const GlmFit pois = fit_ppml(d, y, tol);
  const auto mu = predict_glm(pois, d);
  const auto pw = design_weights(d);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    num += pw[i] * ((y[i] - mu[i]) * (y[i] - mu[i]) - mu[i]);
    den += pw[i] * mu[i] * mu[i];
  }
  double a = den > 0 ? num / den : 0.0;
  bool clamped = false;
  if (!(a > 0)) {
    a = 0.0;
    clamped = true;
  }
  GlmFit fit;
  if (a > 0) {
    IrlsOptions opt;
    opt.tol = tol;
    opt.ridge = pois.ridge;
    opt.nb_dispersion = a;
    opt.start = pois.coefficients;
    fit = fit_irls(d, y, opt);
  } else {
    fit = pois;
  }
  fit.family = Family::negbin;
  fit.dispersion = a;
  fit.clamped = clamped;
  return fit;
}

inline constexpr double kZipBound = 1e-6;

// EM with an intercept-only inflation probability p; prediction (1-p) mu.
inline GlmFit fit_zip(const GlmDesign& d, std::span<const double> y, int em_iters = 100,
                      double tol = 1e-8) {
  const std::size_t n = d.rows();
  if (std::none_of(y.begin(), y.end(), [](double v) { return v == 0; }))
    throw Error("zero-inflated Poisson needs at least one zero count");
  const auto base_w = design_weights(d);
  GlmFit pois = fit_ppml(d, y, kIrlsTolerance);
  auto mu = predict_glm(pois, d);
  double zeros = 0, expected = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += base_w[i];
    if (y[i] == 0) zeros += base_w[i];
    expected += base_w[i] * std::exp(-mu[i]);
  }
  double p = std::clamp((zeros - expected) / total, kZipBound, 1.0 - kZipBound);
  GlmDesign wd = d;
  wd.row_weights.assign(n, 0.0);
  GlmFit cur = pois;
  bool clamped = false;
  for (int it = 0; it < em_iters; ++it) {
    double tau_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double tau = 0.0;
      if (y[i] == 0) tau = p / (p + (1.0 - p) * std::exp(-mu[i]));
      tau_sum += base_w[i] * tau;
      wd.row_weights[i] = base_w[i] * (1.0 - tau);
    }
    double p_new = tau_sum / total;
    clamped = p_new <= kZipBound || p_new >= 1.0 - kZipBound;
    p_new = std::clamp(p_new, kZipBound, 1.0 - kZipBound);
    IrlsOptions opt;
    opt.ridge = pois.ridge;
    opt.start = cur.coefficients;
    cur = fit_irls(wd, y, opt);
    mu = predict_glm(cur, d);
    const double delta = std::abs(p_new - p);
    p = p_new;
    if (delta < tol) break;
  }
  cur.family = Family::zip;
  cur.inflation = p;
  cur.clamped = clamped;
  return cur;
}

struct ZeroAugmentation {
  std::size_t sampled_hours = 200;
  std::size_t zero_budget = 1'000'000;
  double zero_pos_ratio_target = 0.0;  // <= 0 disables the ratio cap
  bool include_diagonal = false;

  // realized
  std::size_t rows = 0;
  std::size_t zeros = 0;
  std::size_t positives = 0;
  double realized_ratio() const {
    return positives ? static_cast<double>(zeros) / static_cast<double>(positives) : 0.0;
  }
};

// Full universe x universe matrices for sampled training hours; zeros are
// downsampled uniformly to min(budget, ratio_target * positives).
inline std::vector<od::FlowRow> build_zero_augmented_sample(std::span<const od::FlowRow> flows,
                                                            std::size_t universe,
                                                            od::HourStamp train_start,
                                                            od::HourStamp train_end,
                                                            ZeroAugmentation& aug,
                                                            std::uint64_t seed) {
  if (universe == 0) throw Error("zero augmentation needs a non-empty zone universe");
  if (train_end <= train_start) throw EmptyTaskError("zero augmentation: empty training window");
  const auto available = static_cast<std::size_t>(train_end - train_start);
  if (aug.sampled_hours > available)
    throw ConfigError("zero augmentation: sampled_hours " + std::to_string(aug.sampled_hours) +
                      " exceeds the " + std::to_string(available) + " available training hours");
  Rng rng(derive_seed(seed, 21));
  const auto picks = sample_without_replacement(available, aug.sampled_hours, rng);
  std::set<od::HourStamp> hours;
  for (auto k : picks) hours.insert(train_start + static_cast<od::HourStamp>(k));

  std::map<std::pair<od::HourStamp, std::size_t>, std::int64_t> positive;
  for (const auto& r : flows)
    if (hours.count(r.hour) && r.origin < universe && r.dest < universe && r.flow > 0 &&
        (aug.include_diagonal || r.origin != r.dest))
      positive[{r.hour, static_cast<std::size_t>(r.origin) * universe + r.dest}] = r.flow;

  std::vector<od::FlowRow> pos_rows, zero_rows;
  for (auto h : hours)
    for (std::size_t o = 0; o < universe; ++o)
      for (std::size_t dd = 0; dd < universe; ++dd) {
        if (o == dd && !aug.include_diagonal) continue;
        auto it = positive.find({h, o * universe + dd});
        od::FlowRow row{static_cast<od::ZoneIndex>(o), static_cast<od::ZoneIndex>(dd), h,
                        it == positive.end() ? 0 : it->second};
        (row.flow > 0 ? pos_rows : zero_rows).push_back(row);
      }
  std::size_t keep = std::min(aug.zero_budget, zero_rows.size());
  if (aug.zero_pos_ratio_target > 0)
    keep = std::min(keep, static_cast<std::size_t>(std::floor(
                              aug.zero_pos_ratio_target * static_cast<double>(pos_rows.size()))));
  Rng zr(derive_seed(seed, 22));
  const auto kept = sample_without_replacement(zero_rows.size(), keep, zr);
  std::vector<od::FlowRow> out = std::move(pos_rows);
  aug.positives = out.size();
  for (auto k : kept) out.push_back(zero_rows[k]);
  aug.zeros = kept.size();
  aug.rows = out.size();
  std::sort(out.begin(), out.end(), od::key_less);
  return out;
}

struct FeFitMeta {
  std::size_t rows_pre = 0;
  std::size_t rows_post = 0;
  std::map<std::string, std::size_t> levels;
  std::size_t categories = 0;
  std::size_t columns = 0;
  double wall_seconds = 0.0;
};

struct FeFit {
  GlmFit fit;
  FeEncoder encoder;
  FeFitMeta meta;
};

inline FeFit fit_ppml_fe(std::span<const od::FlowRow> rows, const od::ImpedanceMatrix& imp,
                         const FeConfig& cfg, std::size_t max_rows, std::uint64_t seed,
                         double tol = kIrlsTolerance) {
  const auto t0 = std::chrono::steady_clock::now();
  FeFit out;
  out.meta.rows_pre = rows.size();
  std::vector<od::FlowRow> sample;
  if (rows.size() > max_rows) {
    Rng rng(derive_seed(seed, 31));
    for (auto k : sample_without_replacement(rows.size(), max_rows, rng)) sample.push_back(rows[k]);
  } else {
    sample.assign(rows.begin(), rows.end());
  }
  out.meta.rows_post = sample.size();
  out.encoder = FeEncoder(sample, cfg);
  for (auto g : kFeGroups)
    if (enabled(cfg, g)) out.meta.levels[to_string(g)] = out.encoder.level_count(g);
  out.meta.categories = out.encoder.categories();
  out.meta.columns = out.encoder.columns().size();
  if (sample.size() < out.meta.columns)
    throw FitError("fixed-effects fit: " + std::to_string(sample.size()) + " rows cannot identify " +
                   std::to_string(out.meta.columns) + " columns");
  const auto design = out.encoder.encode(sample, imp);
  out.fit = fit_ppml(design, response(sample), tol);
  out.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline std::vector<double> predict_fe(const FeFit& fe, std::span<const od::FlowRow> rows,
                                      const od::ImpedanceMatrix& imp,
                                      std::size_t* unseen = nullptr) {
  const auto design = fe.encoder.encode(rows, imp);
  if (unseen) *unseen = design.unseen_levels;
  return predict_glm(fe.fit, design);
}

inline nlohmann::json to_json(const FeFitMeta& m) {
  return {{"rows_pre", m.rows_pre}, {"rows_post", m.rows_post}, {"levels", m.levels},
          {"categories", m.categories}, {"columns", m.columns}};
}

}  // namespace ambit::glm
