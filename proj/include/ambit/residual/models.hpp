#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/eval/metrics.hpp"
#include "ambit/gbt/booster.hpp"
#include "ambit/glm/count_models.hpp"
#include "ambit/glm/design.hpp"
#include "ambit/glm/irls.hpp"
#include "ambit/od/features.hpp"
#include "ambit/residual/task.hpp"
#include "ambit/spatial/constrained.hpp"
#include "ambit/spatial/gravity.hpp"
#include "ambit/spatial/opportunity.hpp"
#include "ambit/spatial/tuning.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/random.hpp"

namespace ambit::residual {

struct ModelOptions {
  gbt::BoostConfig boost;
  glm::ZeroAugmentation zero_aug;
  glm::FeConfig fe;
  std::size_t fe_max_rows = 100'000;
  std::size_t count_max_rows = 100'000;
  std::vector<double> beta_power{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> beta_exp{0.05, 0.1, 0.2, 0.3, 0.5, 1.0};  // per km
  std::vector<double> gamma{0.5, 1.0, 1.5, 2.0};
  std::vector<double> rho{0.5, 1.0, 1.5, 2.0};
  std::vector<double> delta{0.5, 1.0, 1.5, 2.0};
};

class Model {
 public:
  Model(std::string kind, std::string name) : kind_(std::move(kind)), name_(std::move(name)) {}
  virtual ~Model() = default;

  const std::string& kind() const { return kind_; }
  const std::string& name() const { return name_; }
  void rename(std::string n) { name_ = std::move(n); }

  // Non-negative predictions for `rows` under the task the model was fitted on.
  virtual std::vector<double> predict(const Task& task, std::span<const od::FlowRow> rows) const = 0;
  virtual nlohmann::json to_json() const = 0;

 private:
  std::string kind_;
  std::string name_;
};

using ModelPtr = std::shared_ptr<const Model>;

// kind -> display name, in report order.
inline const std::vector<std::pair<std::string, std::string>>& model_catalog() {
  static const std::vector<std::pair<std::string, std::string>> c{
      {"gravity_flow", "Gravity (flow mass)"},
      {"gravity_poi", "Gravity (POI mass)"},
      {"gravity_time", "Gravity (hour-of-day segmented)"},
      {"ppml", "Gravity (PPML, T>0)"},
      {"ppml_all", "Gravity (PPML, all)"},
      {"ppml_fe", "Gravity (PPML + FE)"},
      {"radiation", "Radiation"},
      {"dc_hourly", "DC Gravity (hourly)"},
      {"oc_power", "Origin-constrained (power)"},
      {"oc_power_poi", "Origin-constrained (power, POI)"},
      {"oc_exp", "Origin-constrained (exp)"},
      {"oc_exp_poi", "Origin-constrained (exp, POI)"},
      {"dest_power", "Destination-constrained (power)"},
      {"cd", "Competing destinations"},
      {"cd_poi", "Competing destinations (POI)"},
      {"ops_flow", "OPS (opportunities)"},
      {"io_flow", "Intervening opportunities (flow)"},
      {"ops_poi", "OPS (POI)"},
      {"io_poi", "Intervening opportunities (POI)"},
      {"negbin", "Negative Binomial"},
      {"zip", "Zero-inflated Poisson"},
      {"xgb_direct", "XGB Direct"},
      {"xgb_poisson", "XGB (Poisson)"},
      {"xgb_tweedie", "XGB (Tweedie)"},
      {"xgb_poisson_gravity_poi", "XGB (Poisson + Gravity POI)"},
      {"xgb_tweedie_gravity_poi", "XGB (Tweedie + Gravity POI)"},
  };
  return c;
}

inline std::string display_name(const std::string& kind) {
  for (const auto& [k, n] : model_catalog())
    if (k == kind) return n;
  throw ConfigError("unknown model '" + kind + "'");
}

namespace detail {

inline std::vector<double> clip(std::vector<double> v) {
  for (auto& x : v) x = std::max(0.0, x);
  return v;
}

inline double validation_mae(const Task& t, const std::vector<double>& pred) {
  return eval::compute_metrics(eval::observed(t.val), pred).mae;
}

}  // namespace detail

class GravityModel final : public Model {
 public:
  GravityModel(std::string kind, bool poi, spatial::GravityParams p)
      : Model(kind, display_name(kind)), poi_(poi), p_(p) {}
  std::vector<double> predict(const Task& t, std::span<const od::FlowRow> rows) const override {
    return poi_ ? spatial::predict_gravity(p_, t.mass.poi, t.mass.poi, t.imp, rows)
                : spatial::predict_gravity(p_, t.mass.out, t.mass.in, t.imp, rows);
  }
  nlohmann::json to_json() const override {
    return {{"kind", kind()}, {"mass", poi_ ? "poi_total" : "flow_out_total x flow_in_total"},
            {"params", spatial::to_json(p_)}};
  }
  const spatial::GravityParams& params() const { return p_; }

 private:
  bool poi_;
  spatial::GravityParams p_;
};

class SegmentedGravityModel final : public Model {
 public:
  explicit SegmentedGravityModel(spatial::SegmentedGravity g)
      : Model("gravity_time", display_name("gravity_time")), g_(std::move(g)) {}
  std::vector<double> predict(const Task& t, std::span<const od::FlowRow> rows) const override {
    return spatial::predict_gravity_segmented(g_, t.mass.out, t.mass.in, t.imp, rows);
  }
  nlohmann::json to_json() const override {
    nlohmann::json seg = nlohmann::json::array();
    for (const auto& p : g_.segments) seg.push_back(spatial::to_json(p));
    return {{"kind", kind()}, {"segments", seg}};
  }
  const spatial::SegmentedGravity& segments() const { return g_; }

 private:
  spatial::SegmentedGravity g_;
};

// PPML and count-family gravity on (1, log m_out, log m_in, log d).
class GlmGravityModel final : public Model {
 public:
  GlmGravityModel(std::string kind, glm::GlmFit fit, nlohmann::json meta)
      : Model(kind, display_name(kind)), fit_(std::move(fit)), meta_(std::move(meta)) {}
  std::vector<double> predict(const Task& t, std::span<const od::FlowRow> rows) const override {
    return glm::predict_glm(fit_, glm::gravity_design(rows, t.mass.out, t.mass.in, t.imp));
  }
  nlohmann::json to_json() const override {
    return {{"kind", kind()}, {"fit", glm::to_json(fit_)}, {"sample", meta_}};
  }
  const glm::GlmFit& fit() const { return fit_; }

 private:
  glm::GlmFit fit_;
  nlohmann::json meta_;
};

class FeModel final : public Model {
 public:
  FeModel(glm::FeFit fe, nlohmann::json sample)
      : Model("ppml_fe", display_name("ppml_fe")), fe_(std::move(fe)), sample_(std::move(sample)) {}
  std::vector<double> predict(const Task& t, std::span<const od::FlowRow> rows) const override {
    return glm::predict_fe(fe_, rows, t.imp);
  }
  nlohmann::json to_json() const override {
    return {{"kind", kind()}, {"meta", glm::to_json(fe_.meta)}, {"sample", sample_},
            {"converged", fe_.fit.converged}, {"iterations", fe_.fit.iterations}};
  }
  const glm::FeFit& fe() const { return fe_; }

 private:
  glm::FeFit fe_;
  nlohmann::json sample_;
};

// Any model whose prediction is a lookup into full-matrix slices.
class MatrixModel final : public Model {
 public:
  MatrixModel(std::string kind, spatial::SliceMatrices m, nlohmann::json params)
      : Model(kind, display_name(kind)), m_(std::move(m)), params_(std::move(params)) {}
  std::vector<double> predict(const Task&, std::span<const od::FlowRow> rows) const override {
    return detail::clip(m_.predict(rows));
  }
  nlohmann::json to_json() const override { return {{"kind", kind()}, {"params", params_}}; }
  const spatial::SliceMatrices& matrices() const { return m_; }

 private:
  spatial::SliceMatrices m_;
  nlohmann::json params_;
};

// Boosted trees on the interpretable features, optionally with log1p of a
// physical baseline as an extra column.
class BoostedModel final : public Model {
 public:
  BoostedModel(std::string kind, gbt::Ensemble ens, ModelPtr base)
      : Model(kind, display_name(kind)), ens_(std::move(ens)), base_(std::move(base)) {}

  FeatureMatrix features(const Task& t, std::span<const od::FlowRow> rows) const {
    if (!base_) return od::build_features(rows, t.zones, t.imp);
    const auto b = base_->predict(t, rows);
    return od::build_features(rows, t.zones, t.imp, std::span<const double>(b));
  }
  std::vector<double> predict(const Task& t, std::span<const od::FlowRow> rows) const override {
    return detail::clip(ens_.predict(features(t, rows)));
  }
  nlohmann::json to_json() const override {
    nlohmann::json j{{"kind", kind()}, {"ensemble", gbt::to_json(ens_)}};
    if (base_) j["baseline"] = base_->to_json();
    return j;
  }
  const gbt::Ensemble& ensemble() const { return ens_; }

 private:
  gbt::Ensemble ens_;
  ModelPtr base_;
};

namespace detail {

inline std::vector<od::FlowRow> zero_augmented_rows(const Task& t, glm::ZeroAugmentation& aug,
                                                    std::uint64_t seed) {
  const auto rows = residual::detail::training_rows(t.full, t.train_start, t.train_end, t.is_held);
  aug.sampled_hours =
      std::min<std::size_t>(aug.sampled_hours, static_cast<std::size_t>(t.train_end - t.train_start));
  auto sample = glm::build_zero_augmented_sample(rows, t.n_zones(), t.train_start, t.train_end, aug, seed);
  if (!t.holdout()) return sample;
  std::vector<od::FlowRow> kept;
  aug.rows = aug.zeros = aug.positives = 0;
  for (const auto& r : sample) {
    if (t.is_held[r.origin] || t.is_held[r.dest]) continue;
    kept.push_back(r);
    ++aug.rows;
    ++(r.flow > 0 ? aug.positives : aug.zeros);
  }
  return kept;
}

inline nlohmann::json to_json(const glm::ZeroAugmentation& a) {
  return {{"sampled_hours", a.sampled_hours}, {"zero_budget", a.zero_budget},
          {"zero_pos_ratio_target", a.zero_pos_ratio_target}, {"rows", a.rows},
          {"zeros", a.zeros}, {"positives", a.positives}, {"realized_ratio", a.realized_ratio()}};
}

inline std::vector<od::FlowRow> subsample_rows(std::vector<od::FlowRow> rows, std::size_t max_rows,
                                               std::uint64_t seed, std::uint64_t stream) {
  if (rows.size() <= max_rows) return rows;
  Rng rng(derive_seed(seed, stream));
  std::vector<od::FlowRow> out;
  out.reserve(max_rows);
  for (auto k : sample_without_replacement(rows.size(), max_rows, rng)) out.push_back(rows[k]);
  return out;
}

inline const od::MassVector& flow_or_poi(const Task& t, bool poi, bool destination_side) {
  if (poi) return t.mass.poi;
  return destination_side ? t.mass.in : t.mass.out;
}

}  // namespace detail

inline std::shared_ptr<GravityModel> fit_gravity_model(const Task& t, bool poi) {
  const auto& mo = poi ? t.mass.poi : t.mass.out;
  const auto& md = poi ? t.mass.poi : t.mass.in;
  return std::make_shared<GravityModel>(poi ? "gravity_poi" : "gravity_flow", poi,
                                        spatial::fit_gravity_unconstrained(t.train, mo, md, t.imp));
}

inline std::shared_ptr<SegmentedGravityModel> fit_segmented_model(const Task& t) {
  return std::make_shared<SegmentedGravityModel>(
      spatial::fit_gravity_segmented(t.train, t.mass.out, t.mass.in, t.imp));
}

inline std::shared_ptr<GlmGravityModel> fit_ppml_model(const Task& t, bool with_zeros,
                                                       const ModelOptions& opt) {
  if (!with_zeros) {
    std::vector<od::FlowRow> pos;
    for (const auto& r : t.train)
      if (r.flow > 0) pos.push_back(r);
    const auto d = glm::gravity_design(pos, t.mass.out, t.mass.in, t.imp);
    return std::make_shared<GlmGravityModel>("ppml", glm::fit_ppml(d, glm::response(pos)),
                                             nlohmann::json{{"rows", pos.size()}});
  }
  auto aug = opt.zero_aug;
  const auto rows = detail::zero_augmented_rows(t, aug, t.seed);
  const auto d = glm::gravity_design(rows, t.mass.out, t.mass.in, t.imp);
  return std::make_shared<GlmGravityModel>("ppml_all", glm::fit_ppml(d, glm::response(rows)),
                                           detail::to_json(aug));
}

inline std::shared_ptr<FeModel> fit_fe_model(const Task& t, const ModelOptions& opt) {
  auto aug = opt.zero_aug;
  const auto rows = detail::zero_augmented_rows(t, aug, t.seed);
  auto fe = glm::fit_ppml_fe(rows, t.imp, opt.fe, opt.fe_max_rows, t.seed);
  return std::make_shared<FeModel>(std::move(fe), detail::to_json(aug));
}

inline std::shared_ptr<GlmGravityModel> fit_count_model(const Task& t, bool zip,
                                                        const ModelOptions& opt) {
  auto aug = opt.zero_aug;
  auto rows = detail::subsample_rows(detail::zero_augmented_rows(t, aug, t.seed),
                                     opt.count_max_rows, t.seed, 51);
  const auto d = glm::gravity_design(rows, t.mass.out, t.mass.in, t.imp);
  const auto y = glm::response(rows);
  auto meta = detail::to_json(aug);
  meta["subsample_rows"] = rows.size();
  return std::make_shared<GlmGravityModel>(zip ? "zip" : "negbin",
                                           zip ? glm::fit_zip(d, y) : glm::fit_negbin(d, y), meta);
}

// Grid-tuned full-matrix model: `build` maps a grid point to slice matrices.
inline std::shared_ptr<MatrixModel> fit_tuned_matrix(
    const Task& t, const std::string& kind, const std::vector<spatial::GridPoint>& grid,
    const std::function<spatial::SliceMatrices(const spatial::GridPoint&)>& build,
    nlohmann::json params) {
  const auto res = spatial::tune_grid(kind, grid, [&](const spatial::GridPoint& p) {
    return detail::validation_mae(t, detail::clip(build(p).predict(t.val)));
  });
  params["selected"] = res.best;
  params["tuning"] = spatial::to_json(res);
  return std::make_shared<MatrixModel>(kind, build(res.best), std::move(params));
}

inline std::shared_ptr<MatrixModel> fit_constrained_model(const Task& t, const std::string& kind,
                                                          const ModelOptions& opt) {
  spatial::ConstrainedSpec base;
  bool poi = false;
  if (kind == "dc_hourly") base.variant = spatial::ConstrainedVariant::doubly;
  else if (kind == "dest_power") base.variant = spatial::ConstrainedVariant::destination;
  else if (kind == "oc_power") {}
  else if (kind == "oc_power_poi") poi = true;
  else if (kind == "oc_exp") base.decay_form = od::DecayForm::exponential;
  else if (kind == "oc_exp_poi") {
    base.decay_form = od::DecayForm::exponential;
    poi = true;
  } else {
    throw ConfigError("not a constrained model: " + kind);
  }
  const bool dest_side = base.variant != spatial::ConstrainedVariant::destination;
  const od::MassVector& mass = detail::flow_or_poi(t, poi, dest_side);
  std::map<std::string, std::vector<double>> axes{
      {"beta", base.decay_form == od::DecayForm::power ? opt.beta_power : opt.beta_exp}};
  if (base.variant != spatial::ConstrainedVariant::doubly) axes["gamma"] = opt.gamma;
  auto build = [&](const spatial::GridPoint& p) {
    auto s = base;
    s.beta = p.at("beta");
    s.mass_exponent = p.count("gamma") ? p.at("gamma") : 1.0;
    return spatial::predict_constrained(s, mass, t.imp, t.margins).matrices;
  };
  return fit_tuned_matrix(t, kind, spatial::cartesian_grid(axes), build,
                          {{"decay_form", od::to_string(base.decay_form)},
                           {"mass", od::to_string(mass.definition)}});
}

inline std::shared_ptr<MatrixModel> fit_competing_model(const Task& t, bool poi,
                                                        const ModelOptions& opt) {
  const od::MassVector& mass = detail::flow_or_poi(t, poi, true);
  auto build = [&](const spatial::GridPoint& p) {
    spatial::CompetingDestParams cd;
    cd.base.beta = p.at("beta");
    cd.base.gamma = 1.0;
    cd.rho = p.at("rho");
    cd.delta = p.at("delta");
    return spatial::predict_competing_destinations(cd, mass, t.imp, t.margins).matrices;
  };
  const auto grid =
      spatial::cartesian_grid({{"beta", opt.beta_power}, {"rho", opt.rho}, {"delta", opt.delta}});
  return fit_tuned_matrix(t, poi ? "cd_poi" : "cd", grid, build,
                          {{"gamma", 1.0}, {"mass", od::to_string(mass.definition)}});
}

inline std::shared_ptr<MatrixModel> fit_opportunity_model(const Task& t, const std::string& kind) {
  const bool poi = kind == "ops_poi" || kind == "io_poi";
  const od::MassVector& mass = detail::flow_or_poi(t, poi, true);
  const auto opp = spatial::build_opportunity_field(mass, t.imp);
  nlohmann::json params{{"mass", od::to_string(mass.definition)}};
  if (kind == "radiation")
    return std::make_shared<MatrixModel>(kind, spatial::predict_radiation(mass, opp, t.outflow), params);
  if (kind == "ops_flow" || kind == "ops_poi")
    return std::make_shared<MatrixModel>(
        kind, spatial::predict_opportunity_model(spatial::OpportunityVariant::ops, opp, mass, t.outflow, 0.0),
        params);
  if (kind != "io_flow" && kind != "io_poi") throw ConfigError("not an opportunity model: " + kind);
  auto build = [&](const spatial::GridPoint& p) {
    return spatial::predict_opportunity_model(spatial::OpportunityVariant::intervening, opp, mass,
                                              t.outflow, p.at("L"));
  };
  return fit_tuned_matrix(t, kind, spatial::cartesian_grid({{"L", spatial::opportunity_l_grid(mass)}}),
                          build, params);
}

inline ModelPtr fit_model(const std::string& kind, const Task& t, const ModelOptions& opt);

inline std::shared_ptr<BoostedModel> fit_boosted_model(const Task& t, const std::string& kind,
                                                       gbt::Objective objective,
                                                       const std::optional<std::string>& base_kind,
                                                       const ModelOptions& opt) {
  ModelPtr base = base_kind ? fit_model(*base_kind, t, opt) : nullptr;
  auto frame = [&](std::span<const od::FlowRow> rows) {
    if (!base) return od::build_features(rows, t.zones, t.imp);
    const auto b = base->predict(t, rows);
    return od::build_features(rows, t.zones, t.imp, std::span<const double>(b));
  };
  auto cfg = opt.boost;
  cfg.objective = objective;
  auto ens = gbt::train(frame(t.train), eval::observed(t.train), frame(t.val),
                        eval::observed(t.val), cfg);
  return std::make_shared<BoostedModel>(kind, std::move(ens), base);
}

inline ModelPtr fit_model(const std::string& kind, const Task& t, const ModelOptions& opt) {
  (void)display_name(kind);
  if (kind == "gravity_flow") return fit_gravity_model(t, false);
  if (kind == "gravity_poi") return fit_gravity_model(t, true);
  if (kind == "gravity_time") return fit_segmented_model(t);
  if (kind == "ppml") return fit_ppml_model(t, false, opt);
  if (kind == "ppml_all") return fit_ppml_model(t, true, opt);
  if (kind == "ppml_fe") return fit_fe_model(t, opt);
  if (kind == "negbin") return fit_count_model(t, false, opt);
  if (kind == "zip") return fit_count_model(t, true, opt);
  if (kind == "cd") return fit_competing_model(t, false, opt);
  if (kind == "cd_poi") return fit_competing_model(t, true, opt);
  if (kind == "radiation" || kind.rfind("ops_", 0) == 0 || kind.rfind("io_", 0) == 0)
    return fit_opportunity_model(t, kind);
  if (kind == "dc_hourly" || kind == "dest_power" || kind.rfind("oc_", 0) == 0)
    return fit_constrained_model(t, kind, opt);
  if (kind == "xgb_direct") return fit_boosted_model(t, kind, gbt::Objective::squared, {}, opt);
  if (kind == "xgb_poisson") return fit_boosted_model(t, kind, gbt::Objective::poisson, {}, opt);
  if (kind == "xgb_tweedie") return fit_boosted_model(t, kind, gbt::Objective::tweedie, {}, opt);
  if (kind == "xgb_poisson_gravity_poi")
    return fit_boosted_model(t, kind, gbt::Objective::poisson, "gravity_poi", opt);
  if (kind == "xgb_tweedie_gravity_poi")
    return fit_boosted_model(t, kind, gbt::Objective::tweedie, "gravity_poi", opt);
  throw ConfigError("unknown model '" + kind + "'");
}

}  // namespace ambit::residual
