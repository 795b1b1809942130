#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/eval/holdout.hpp"
#include "ambit/eval/metrics.hpp"
#include "ambit/gbt/booster.hpp"
#include "ambit/od/features.hpp"
#include "ambit/residual/models.hpp"
#include "ambit/residual/task.hpp"
#include "ambit/util/error.hpp"

namespace ambit::residual {

enum class Anchor { gravity_flow, gravity_poi, ppml, ppml_all, gravity_time_segmented, gravity_dc };

inline constexpr std::array<Anchor, 6> kAnchors{Anchor::gravity_time_segmented, Anchor::gravity_dc,
                                                Anchor::ppml,          Anchor::ppml_all,
                                                Anchor::gravity_flow,  Anchor::gravity_poi};

inline const char* to_string(Anchor a) {
  switch (a) {
    case Anchor::gravity_flow: return "gravity_flow";
    case Anchor::gravity_poi: return "gravity_poi";
    case Anchor::ppml: return "ppml";
    case Anchor::ppml_all: return "ppml_all";
    case Anchor::gravity_time_segmented: return "gravity_time_segmented";
    case Anchor::gravity_dc: return "gravity_dc";
  }
  return "?";
}

inline Anchor anchor_from_string(const std::string& s) {
  for (auto a : kAnchors)
    if (s == to_string(a)) return a;
  throw ConfigError("unknown anchor '" + s + "'");
}

// Baseline model kind fitted for each anchor.
inline std::string anchor_model_kind(Anchor a) {
  switch (a) {
    case Anchor::gravity_flow: return "gravity_flow";
    case Anchor::gravity_poi: return "gravity_poi";
    case Anchor::ppml: return "ppml";
    case Anchor::ppml_all: return "ppml_all";
    case Anchor::gravity_time_segmented: return "gravity_time";
    case Anchor::gravity_dc: return "dc_hourly";
  }
  return "?";
}

struct AnchorSpec {
  Anchor anchor = Anchor::gravity_poi;
  bool include_base_feature = true;
};

inline std::string ambit_name(const AnchorSpec& s) {
  if (s.anchor == Anchor::gravity_poi)
    return s.include_base_feature ? "AMBIT (Residual + Gravity POI)" : "AMBIT (Gravity POI, no base feat)";
  std::string n;
  switch (s.anchor) {
    case Anchor::gravity_flow: n = "xgb residual gravity flow"; break;
    case Anchor::ppml: n = "xgb residual gravity ppml"; break;
    case Anchor::ppml_all: n = "xgb residual gravity ppml all"; break;
    case Anchor::gravity_time_segmented: n = "xgb residual gravity time"; break;
    case Anchor::gravity_dc: n = "xgb residual gravity dc"; break;
    default: break;
  }
  return s.include_base_feature ? n : n + " (no base feat)";
}

inline double residual_target(double T, double T_base) { return std::log1p(T) - std::log1p(T_base); }

// r_hat == 0 returns T_base untouched so the identity holds bit for bit.
inline double reconstruct(double T_base, double r_hat) {
  if (r_hat == 0.0) return std::max(0.0, T_base);
  return std::max(0.0, std::expm1(std::log1p(T_base) + r_hat));
}

struct ResidualFrame {
  std::vector<double> T;
  std::vector<double> T_base;
  std::vector<double> r;
  FeatureMatrix features;
};

inline ResidualFrame build_residual_frame(std::span<const od::FlowRow> rows,
                                          std::span<const double> T_base, const od::ZoneTable& zones,
                                          const od::ImpedanceMatrix& imp, bool include_base_feature) {
  if (T_base.size() != rows.size()) throw Error("baseline length does not match rows");
  ResidualFrame f;
  f.T = eval::observed(rows);
  f.T_base.assign(T_base.begin(), T_base.end());
  f.r.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(T_base[i]) || T_base[i] < 0)
      throw Error("baseline prediction at row " + std::to_string(i) + " is not finite and >= 0");
    f.r[i] = residual_target(f.T[i], T_base[i]);
  }
  f.features = include_base_feature ? od::build_features(rows, zones, imp, T_base)
                                    : od::build_features(rows, zones, imp);
  return f;
}

// Baseline plus residual ensemble; predict = reconstruct(baseline, ensemble).
class AmbitModel final : public Model {
 public:
  AmbitModel(AnchorSpec spec, ModelPtr baseline, gbt::Ensemble ens)
      : Model(std::string("ambit_") + to_string(spec.anchor), ambit_name(spec)),
        spec_(spec), baseline_(std::move(baseline)), ens_(std::move(ens)) {}

  std::vector<double> predict(const Task& t, std::span<const od::FlowRow> rows) const override {
    const auto base = baseline_->predict(t, rows);
    const auto frame = build_residual_frame(rows, base, t.zones, t.imp, spec_.include_base_feature);
    const auto r = ens_.predict(frame.features);
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = reconstruct(base[i], r[i]);
    return out;
  }

  nlohmann::json to_json() const override {
    return {{"kind", kind()},
            {"anchor", to_string(spec_.anchor)},
            {"include_base_feature", spec_.include_base_feature},
            {"baseline", baseline_->to_json()},
            {"ensemble", gbt::to_json(ens_)}};
  }

  // Manifest form: baseline and ensemble stored as separate documents.
  nlohmann::json manifest(const std::string& baseline_ref, const std::string& ensemble_ref) const {
    return {{"kind", kind()}, {"name", name()}, {"anchor", to_string(spec_.anchor)},
            {"include_base_feature", spec_.include_base_feature},
            {"baseline", baseline_ref}, {"ensemble", ensemble_ref},
            {"compose", "max(0, exp(log1p(T_base) + r_hat) - 1)"}};
  }

  const AnchorSpec& spec() const { return spec_; }
  const ModelPtr& baseline() const { return baseline_; }
  const gbt::Ensemble& ensemble() const { return ens_; }

 private:
  AnchorSpec spec_;
  ModelPtr baseline_;
  gbt::Ensemble ens_;
};

// Residual learner: squared loss in residual space, started from r = 0 so a
// zero-round ensemble reproduces the baseline.
inline std::shared_ptr<AmbitModel> fit_ambit(const Task& t, const AnchorSpec& spec,
                                             const gbt::BoostConfig& boost,
                                             const ModelOptions& opt = {},
                                             ModelPtr baseline = nullptr) {
  if (!baseline) baseline = fit_model(anchor_model_kind(spec.anchor), t, opt);
  const auto btr = baseline->predict(t, t.train);
  const auto bva = baseline->predict(t, t.val);
  const auto ftr = build_residual_frame(t.train, btr, t.zones, t.imp, spec.include_base_feature);
  const auto fva = build_residual_frame(t.val, bva, t.zones, t.imp, spec.include_base_feature);
  auto cfg = boost;
  cfg.objective = gbt::Objective::squared;
  cfg.base_score = 0.0;
  auto ens = gbt::train(ftr.features, ftr.r, fva.features, fva.r, cfg);
  return std::make_shared<AmbitModel>(spec, std::move(baseline), std::move(ens));
}

struct AblationRow {
  std::string model;
  std::uint64_t seed = 0;
  std::optional<eval::Metrics> metrics;
  std::string error;
};

// One fit per (anchor, seed); a failing anchor is recorded and the rest run.
// With `holdout`, each seed's task is replaced by its spatial-holdout task.
inline std::vector<AblationRow> run_anchor_ablation(
    const std::function<Task(std::uint64_t)>& task_for_seed, const std::vector<AnchorSpec>& anchors,
    const gbt::BoostConfig& boost, const std::vector<std::uint64_t>& seeds,
    const ModelOptions& opt = {}, const std::optional<eval::HoldoutSpec>& holdout = {}) {
  if (anchors.empty()) throw ConfigError("anchor ablation needs at least one anchor");
  if (seeds.empty()) throw ConfigError("anchor ablation needs at least one seed");
  std::vector<AblationRow> out;
  for (auto seed : seeds) {
    Task task = task_for_seed(seed);
    if (holdout) task = make_holdout_task(task, *holdout);
    for (const auto& a : anchors) {
      AblationRow row;
      row.model = ambit_name(a);
      row.seed = seed;
      try {
        auto cfg = boost;
        cfg.seed = seed;
        const auto m = fit_ambit(task, a, cfg, opt);
        row.metrics = eval::compute_metrics(eval::observed(task.test), m->predict(task, task.test));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace ambit::residual
