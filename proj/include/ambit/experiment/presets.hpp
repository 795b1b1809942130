#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/attribution/reports.hpp"
#include "ambit/attribution/treeshap.hpp"
#include "ambit/eval/holdout.hpp"
#include "ambit/eval/metrics.hpp"
#include "ambit/eval/seeds.hpp"
#include "ambit/experiment/bench.hpp"
#include "ambit/experiment/config.hpp"
#include "ambit/experiment/data.hpp"
#include "ambit/experiment/fullmatrix.hpp"
#include "ambit/experiment/report.hpp"
#include "ambit/residual/ambit.hpp"
#include "ambit/util/random.hpp"

namespace ambit::experiment {

class Context {
 public:
  Context(const ExperimentConfig& cfg, const Dataset& data, std::ostream* log = nullptr)
      : cfg(cfg), data(data), log_(log) {}

  const ExperimentConfig& cfg;
  const Dataset& data;

  const residual::Task& task(std::uint64_t seed) {
    auto& slot = tasks_[seed];
    if (!slot) slot = std::make_unique<residual::Task>(make_task(cfg, data, seed));
    return *slot;
  }
  residual::ModelOptions options(std::uint64_t seed) const { return model_options(cfg, seed); }
  Bench& bench(std::uint64_t seed) {
    auto& slot = benches_[seed];
    if (!slot) slot = std::make_unique<Bench>(task(seed), options(seed), cfg.parallel);
    return *slot;
  }
  void say(const std::string& s) const {
    if (log_) *log_ << s << std::endl;
  }

 private:
  std::ostream* log_;
  std::map<std::uint64_t, std::unique_ptr<residual::Task>> tasks_;
  std::map<std::uint64_t, std::unique_ptr<Bench>> benches_;
};

namespace detail {

inline const std::string kAmbit = "ambit_gravity_poi";

// One metrics row per kind; failures become NA rows and are recorded.
inline void metric_rows(PresetOutput& out, Table& t, Bench& b, const std::vector<std::string>& kinds,
                        std::initializer_list<Col> cols,
                        const std::map<std::string, std::string>& rename = {},
                        const std::vector<std::string>& prefix = {}) {
  b.prefetch(kinds);
  for (const auto& k : kinds) {
    const auto& f = b.get(k);
    const auto it = rename.find(k);
    const std::string name = it == rename.end() ? f.name : it->second;
    if (!f.ok()) out.errors.push_back(name + ": " + f.error);
    auto head = prefix;
    head.insert(head.begin(), name);
    t.add(row_of(head, metric_cells(f.metrics, cols)));
  }
}

inline std::string seed_cell(const std::vector<double>& v) {
  if (v.empty()) return "NA";
  const auto s = eval::aggregate_seed_stats(v);
  if (!s.has_interval) return num(s.mean);
  return num(s.mean) + " ± " + num(s.half_width);
}

inline std::string trimmed_number(double x) {
  if (x == static_cast<double>(static_cast<long long>(x))) return fmt_num(x, 1);
  return ambit::experiment::detail::number_text(x);
}

inline std::string top_label(double k) {
  const auto v = static_cast<long long>(k);
  if (v >= 1000 && v % 1000 == 0) return "top" + std::to_string(v / 1000) + "k";
  return "top" + std::to_string(v);
}

inline eval::HoldoutSpec zone_holdout(const ExperimentConfig& c, eval::MassPolicy policy) {
  eval::HoldoutSpec h;
  h.mode = eval::HoldoutMode::zone_fraction;
  h.fraction = c.holdout.fraction;
  h.seed = c.holdout.seed;
  h.mass_policy = policy;
  return h;
}

inline std::string kind_name(const std::string& kind) {
  if (auto spec = ambit_spec(kind)) return residual::ambit_name(*spec);
  return residual::display_name(kind);
}

}  // namespace detail

inline PresetOutput preset_physical_audit(Context& ctx) {
  PresetOutput out;
  auto& b = ctx.bench(ctx.cfg.seed());
  const std::vector<std::string> table1{"gravity_flow", "gravity_poi", "ppml",      "ppml_all",
                                        "ppml_fe",      "radiation",   "dc_hourly", "oc_power",
                                        "cd",           "ops_flow"};
  const std::vector<std::string> full{"gravity_flow", "gravity_poi", "ppml",         "ppml_all",
                                      "ppml_fe",      "radiation",   "dc_hourly",    "oc_power",
                                      "oc_power_poi", "oc_exp",      "oc_exp_poi",   "dest_power",
                                      "cd",           "cd_poi",      "ops_flow",     "io_flow",
                                      "ops_poi",      "io_poi"};
  b.prefetch(full);
  PresetOutput scratch;
  detail::metric_rows(scratch, out.table("physical_audit", {"model", "mae", "rmse", "r2", "cpc"}), b,
                      table1, kCore);
  detail::metric_rows(out, out.table("physical_audit_full", {"model", "mae", "rmse", "smape", "r2", "cpc"}),
                      b, full, kFull);
  nlohmann::json params = nlohmann::json::object();
  for (const auto& k : full) {
    const auto& f = b.get(k);
    if (f.ok()) params[k] = f.model->to_json();
  }
  out.files["physical_params.json"] = params.dump(2) + "\n";
  return out;
}

inline PresetOutput preset_main(Context& ctx) {
  PresetOutput out;
  auto& b = ctx.bench(ctx.cfg.seed());
  detail::metric_rows(out, out.table("main", {"model", "mae", "rmse", "r2", "cpc"}), b,
                      {"xgb_direct", detail::kAmbit, "ppml_all", "ppml_fe", "ppml"}, kCore);
  const auto& a = b.get(detail::kAmbit);
  if (a.ok()) {
    auto& z = out.table("zone_errors", {"zone_id", "mae", "smape"});
    for (const auto& e : eval::zone_errors(b.task().test, a.test_pred))
      z.add({std::to_string(b.task().zones[e.zone].id), num(e.mae), num(e.smape)});
  }
  return out;
}

inline PresetOutput preset_ppml_sensitivity(Context& ctx) {
  PresetOutput out;
  detail::metric_rows(out, out.table("ppml_sensitivity", {"model", "mae", "rmse", "r2", "cpc"}),
                      ctx.bench(ctx.cfg.seed()), {"ppml", "ppml_all", "ppml_fe"}, kCore,
                      {{"ppml", "PPML (T>0)"}, {"ppml_all", "PPML (all, zero-aug)"}, {"ppml_fe", "PPML + FE"}});
  return out;
}

inline PresetOutput preset_zero_aug(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  const auto& t = ctx.task(seed);
  const auto opt = ctx.options(seed);
  auto& z = out.table("ppml_zero_aug", {"Setting", "Sampled hours", "Rows", "Zeros", "Positives", "Zero/pos ratio"});
  std::vector<std::pair<std::string, double>> settings{{"base", 0.0}};
  for (double r : ctx.cfg.ppml.ratio_sweep) settings.emplace_back("ratio_" + detail::trimmed_number(r), r);
  for (const auto& [label, ratio] : settings) {
    auto aug = opt.zero_aug;
    aug.zero_pos_ratio_target = ratio;
    residual::detail::zero_augmented_rows(t, aug, t.seed);
    z.add({label, std::to_string(aug.sampled_hours), std::to_string(aug.rows), std::to_string(aug.zeros),
           std::to_string(aug.positives), num(aug.realized_ratio())});
  }
  auto& meta = out.table("ppml_fe_meta", {"Rows (pre)", "Rows (post)", "Origins", "Dests", "Hours",
                                          "One-hot cats", "Train time (s)"},
                         true);
  const auto& f = ctx.bench(seed).get("ppml_fe");
  if (!f.ok()) {
    out.errors.push_back(f.name + ": " + f.error);
    return out;
  }
  const auto& fe = dynamic_cast<const residual::FeModel&>(*f.model).fe();
  auto level = [&](const char* g) {
    auto it = fe.meta.levels.find(g);
    return it == fe.meta.levels.end() ? std::string("0") : std::to_string(it->second);
  };
  meta.add({std::to_string(fe.meta.rows_pre), std::to_string(fe.meta.rows_post), level("origin"),
            level("destination"), level("hour_of_week"), std::to_string(fe.meta.categories),
            fmt_num(fe.meta.wall_seconds, 3)});
  return out;
}

inline PresetOutput preset_seeds(Context& ctx) {
  PresetOutput out;
  const std::vector<std::string> kinds{"ppml", "xgb_direct", detail::kAmbit};
  auto& runs = out.table("seed_runs", {"model", "seed", "mae", "rmse", "r2", "cpc"});
  auto& summary = out.table("seed_robustness", {"Model", "MAE (mean ± CI)", "RMSE (mean ± CI)",
                                                "R2 (mean ± CI)", "CPC (mean ± CI)"});
  for (const auto& k : kinds) {
    std::vector<double> mae, rmse, r2, cpc;
    std::string name;
    for (auto s : ctx.cfg.seeds) {
      const auto& f = ctx.bench(s).get(k);
      name = f.name;
      if (!f.ok()) out.errors.push_back(f.name + " (seed " + std::to_string(s) + "): " + f.error);
      runs.add(row_of({f.name, std::to_string(s)}, metric_cells(f.metrics, kCore)));
      if (!f.ok()) continue;
      mae.push_back(f.metrics->mae);
      rmse.push_back(f.metrics->rmse);
      if (f.metrics->r2) r2.push_back(*f.metrics->r2);
      cpc.push_back(f.metrics->cpc);
    }
    auto mean_or_na = [](const std::vector<double>& v) {
      return v.empty() ? std::string("NA") : num(eval::aggregate_seed_stats(v).mean);
    };
    runs.add({name, "mean", mean_or_na(mae), mean_or_na(rmse), mean_or_na(r2), mean_or_na(cpc)});
    summary.add({name, detail::seed_cell(mae), detail::seed_cell(rmse), detail::seed_cell(r2),
                 detail::seed_cell(cpc)});
  }
  return out;
}

inline PresetOutput preset_anchor_ablation(Context& ctx) {
  using residual::Anchor;
  PresetOutput out;
  const auto& cfg = ctx.cfg;
  const auto seed0 = cfg.seed();
  auto task_for = [&](std::uint64_t s) { return ctx.task(s); };
  auto boost = ctx.options(seed0).boost;
  const auto opt = ctx.options(seed0);

  const std::vector<residual::AnchorSpec> in_task{{Anchor::gravity_time_segmented}, {Anchor::gravity_dc},
                                                  {Anchor::ppml},
                                                  {Anchor::gravity_flow},
                                                  {Anchor::gravity_poi},
                                                  {Anchor::gravity_poi, false}};
  auto record = [&](const residual::AblationRow& r) {
    if (!r.error.empty()) out.errors.push_back(r.model + " (seed " + std::to_string(r.seed) + "): " + r.error);
  };

  const auto first = residual::run_anchor_ablation(task_for, in_task, boost, {seed0}, opt);
  auto& a6 = out.table("residual_ablation", {"model", "mae", "rmse", "r2", "cpc"});
  for (const auto& r : first) {
    record(r);
    a6.add(row_of({r.model}, metric_cells(r.metrics, kCore)));
  }

  const std::vector<residual::AnchorSpec> spatial{{Anchor::gravity_poi}, {Anchor::gravity_dc},
                                                  {Anchor::ppml},        {Anchor::ppml_all},
                                                  {Anchor::gravity_time_segmented},
                                                  {Anchor::gravity_flow}};
  auto& a7 = out.table("residual_ablation_spatial", {"model", "mae", "rmse", "r2", "cpc"});
  for (const auto& r : residual::run_anchor_ablation(task_for, spatial, boost, {seed0}, opt,
                                                     detail::zone_holdout(cfg, eval::MassPolicy::zero))) {
    record(r);
    a7.add(row_of({r.model}, metric_cells(r.metrics, kCore)));
  }

  // Seed CIs: the first seed reuses the rows above.
  std::vector<residual::AblationRow> all(first.begin(), first.end());
  std::vector<std::uint64_t> rest(cfg.seeds.begin() + 1, cfg.seeds.end());
  if (!rest.empty()) {
    const std::vector<residual::AnchorSpec> ci(in_task.begin(), in_task.end() - 1);
    for (auto& r : residual::run_anchor_ablation(task_for, ci, boost, rest, opt)) {
      record(r);
      all.push_back(std::move(r));
    }
  }
  auto& a8 = out.table("residual_ablation_ci", {"Model", "MAE (mean ± CI)", "RMSE (mean ± CI)",
                                                "R2 (mean ± CI)", "CPC (mean ± CI)"});
  auto add_ci = [&](const std::string& name, const std::vector<std::optional<eval::Metrics>>& ms) {
    std::vector<double> mae, rmse, r2, cpc;
    for (const auto& m : ms) {
      if (!m) continue;
      mae.push_back(m->mae);
      rmse.push_back(m->rmse);
      if (m->r2) r2.push_back(*m->r2);
      cpc.push_back(m->cpc);
    }
    a8.add({name, detail::seed_cell(mae), detail::seed_cell(rmse), detail::seed_cell(r2), detail::seed_cell(cpc)});
  };
  std::vector<std::optional<eval::Metrics>> xgb;
  for (auto s : cfg.seeds) {
    const auto& f = ctx.bench(s).get("xgb_direct");
    if (!f.ok()) out.errors.push_back(f.name + " (seed " + std::to_string(s) + "): " + f.error);
    xgb.push_back(f.metrics);
  }
  add_ci(residual::display_name("xgb_direct"), xgb);
  for (auto a : {Anchor::gravity_dc, Anchor::gravity_flow, Anchor::gravity_poi, Anchor::ppml,
                 Anchor::gravity_time_segmented}) {
    const auto name = residual::ambit_name({a, true});
    std::vector<std::optional<eval::Metrics>> ms;
    for (const auto& r : all)
      if (r.model == name) ms.push_back(r.metrics);
    add_ci(name, ms);
  }
  return out;
}

inline PresetOutput preset_count_objectives(Context& ctx) {
  PresetOutput out;
  detail::metric_rows(out, out.table("count_objectives", {"model", "mae", "rmse", "r2", "cpc"}),
                      ctx.bench(ctx.cfg.seed()),
                      {"xgb_direct", "xgb_poisson", "xgb_tweedie", "xgb_poisson_gravity_poi",
                       "xgb_tweedie_gravity_poi"},
                      kCore);
  return out;
}

inline PresetOutput preset_base_feat_ablation(Context& ctx) {
  PresetOutput out;
  detail::metric_rows(out, out.table("residual_base_ablation", {"model", "mae", "rmse", "r2", "cpc"}),
                      ctx.bench(ctx.cfg.seed()), {detail::kAmbit, detail::kAmbit + "_nobase"}, kCore);
  return out;
}

inline PresetOutput preset_fe_fairness(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  auto& b = ctx.bench(seed);
  auto& t = out.table("ppml_fe_fairness", {"model", "mae", "rmse", "r2", "cpc"});
  detail::metric_rows(out, t, b, {"xgb_direct"}, kCore);

  const auto& fe = b.get("ppml_fe");
  std::optional<eval::Metrics> small;
  if (fe.ok()) {
    const auto n = dynamic_cast<const residual::FeModel&>(*fe.model).fe().meta.rows_post;
    try {
      auto sub = b.task();
      sub.train = residual::detail::subsample_rows(sub.train, n, seed, 71);
      out.notes.push_back("XGB (FE-sample size) trained on " + std::to_string(sub.train.size()) + " rows");
      const auto m = residual::fit_model("xgb_direct", sub, b.options());
      small = eval::compute_metrics(eval::observed(sub.test), m->predict(sub, sub.test));
    } catch (const std::exception& e) {
      out.errors.push_back(std::string("XGB (FE-sample size): ") + e.what());
    }
  } else {
    out.errors.push_back(fe.name + ": " + fe.error);
  }
  t.add(row_of({"XGB (FE-sample size)"}, metric_cells(small, kCore)));
  detail::metric_rows(out, t, b, {"ppml_fe"}, kCore);
  return out;
}

inline PresetOutput preset_impedance(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  auto tt = ctx.task(seed);
  tt.imp = travel_time_matrix(ctx.cfg, ctx.data, tt);
  const double coverage = tt.imp.coverage;
  Bench b(tt, ctx.options(seed), ctx.cfg.parallel);
  auto& t = out.table("impedance_sensitivity", {"Model", "mae", "rmse", "r2", "cpc", "Coverage"});
  b.prefetch({"gravity_flow", "ppml"});
  for (const auto& [k, name] : std::vector<std::pair<std::string, std::string>>{
           {"gravity_flow", "Gravity (travel-time)"}, {"ppml", "PPML (travel-time)"}}) {
    const auto& f = b.get(k);
    if (!f.ok()) out.errors.push_back(name + ": " + f.error);
    auto row = row_of({name}, metric_cells(f.metrics, kCore));
    row.push_back(num(coverage));
    t.add(row);
  }
  return out;
}

inline PresetOutput preset_shap(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  auto& b = ctx.bench(seed);
  const auto& t = b.task();
  const auto& f = b.get(detail::kAmbit);
  if (!f.ok()) {
    out.errors.push_back(f.name + ": " + f.error);
    return out;
  }
  const auto& model = dynamic_cast<const residual::AmbitModel&>(*f.model);
  std::vector<od::HourStamp> hours;
  for (const auto& r : t.test) hours.push_back(r.hour);
  std::sort(hours.begin(), hours.end());
  const od::HourStamp mid = hours[hours.size() / 2];
  std::vector<std::size_t> early, late;
  for (std::size_t i = 0; i < t.test.size(); ++i) (t.test[i].hour < mid ? early : late).push_back(i);
  if (early.empty() || late.empty()) {
    out.errors.push_back("shap: test window cannot be split at its median hour");
    return out;
  }
  const std::size_t n = std::min({ctx.cfg.shap.rows_per_window, early.size(), late.size()});
  auto pick = [&](const std::vector<std::size_t>& pool, std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream));
    std::vector<std::size_t> ids;
    for (auto k : sample_without_replacement(pool.size(), n, rng)) ids.push_back(pool[k]);
    return ids;
  };
  const auto ids_early = pick(early, 81), ids_late = pick(late, 82);
  auto explain = [&](const std::vector<std::size_t>& ids) {
    std::vector<od::FlowRow> rows;
    for (auto i : ids) rows.push_back(t.test[i]);
    const auto base = model.baseline()->predict(t, rows);
    const auto frame = residual::build_residual_frame(rows, base, t.zones, t.imp,
                                                      model.spec().include_base_feature);
    return attribution::shap_values(model.ensemble(), frame.features);
  };
  const auto a_early = explain(ids_early), a_late = explain(ids_late);
  const auto stab = attribution::rank_stability(a_early, a_late);
  out.table("shap_stability", {"n/window", "mid", "Spearman ρ"})
      .add({std::to_string(n), od::format_hour(mid), num(stab.spearman_rho)});
  if (stab.degenerate) out.notes.push_back("shap: degenerate rank comparison");

  attribution::Attributions all = a_early;
  for (std::size_t r = 0; r < a_late.rows.size(); ++r) all.rows.push_back(a_late.rows[r]);
  FeatureMatrix vals(all.feature_names, a_early.values.rows + a_late.values.rows);
  std::copy(a_early.values.data.begin(), a_early.values.data.end(), vals.data.begin());
  std::copy(a_late.values.data.begin(), a_late.values.data.end(),
            vals.data.begin() + static_cast<std::ptrdiff_t>(a_early.values.data.size()));
  all.values = std::move(vals);
  std::vector<std::size_t> ids(ids_early);
  ids.insert(ids.end(), ids_late.begin(), ids_late.end());

  std::ostringstream summary, values;
  attribution::write_summary_csv(summary, attribution::global_summary(all));
  attribution::write_attributions_csv(values, all, ids);
  out.files["shap_summary.csv"] = summary.str();
  out.files["shap_values.csv"] = values.str();

  attribution::WaterfallFrame wf;
  for (auto i : ids) {
    wf.observed.push_back(static_cast<double>(t.test[i].flow));
    wf.predicted.push_back(f.test_pred[i]);
    wf.distance.push_back(t.imp(t.test[i].origin, t.test[i].dest));
  }
  out.files["shap_examples.json"] = attribution::to_json(attribution::waterfall_examples(all, wf)).dump(2) + "\n";
  return out;
}

inline PresetOutput preset_cpc_sensitivity(Context& ctx) {
  PresetOutput out;
  auto& b = ctx.bench(ctx.cfg.seed());
  auto& t = out.table("cpc_sensitivity", {"Model", "CPC (global)", "CPC (hour-avg)"});
  const std::vector<std::string> kinds{"ppml", "xgb_direct", detail::kAmbit};
  b.prefetch(kinds);
  for (const auto& k : kinds) {
    const auto& f = b.get(k);
    if (!f.ok()) {
      out.errors.push_back(f.name + ": " + f.error);
      t.add({f.name, "NA", "NA"});
      continue;
    }
    t.add({f.name, num(f.metrics->cpc), num(eval::cpc_hour_averaged(b.task().test, f.test_pred))});
  }
  return out;
}

inline PresetOutput preset_monotone(Context& ctx) {
  using residual::Anchor;
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  auto opt = ctx.options(seed);
  opt.boost.monotone[od::kDistanceFeature] = -1;
  Bench b(ctx.task(seed), opt, ctx.cfg.parallel);
  const std::vector<std::string> kinds{"xgb_direct", "ambit_gravity_flow", detail::kAmbit, "ambit_ppml"};
  auto& t = out.table("monotone", {"model", "mae", "rmse", "r2", "cpc"});
  detail::metric_rows(out, t, b, kinds, kCore);

  // Distance sweep on test rows: 100 context rows x 50 grid points.
  const auto& task = b.task();
  Rng rng(derive_seed(seed, 91));
  std::vector<od::FlowRow> ctx_rows;
  for (auto k : sample_without_replacement(task.test.size(), 100, rng)) ctx_rows.push_back(task.test[k]);
  double dmax = 0;
  for (double v : task.imp.d) dmax = std::max(dmax, v);
  std::vector<double> grid(50);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = dmax * static_cast<double>(k + 1) / 50.0;
  auto& chk = out.table("monotone_check", {"model", "rows", "pairs_checked", "violations", "structure_ok"});
  for (const auto& k : kinds) {
    const auto& f = b.get(k);
    if (!f.ok()) continue;
    const gbt::Ensemble* ens = nullptr;
    FeatureMatrix X;
    if (auto spec = ambit_spec(k)) {
      const auto& m = dynamic_cast<const residual::AmbitModel&>(*f.model);
      ens = &m.ensemble();
      const auto base = m.baseline()->predict(task, ctx_rows);
      X = residual::build_residual_frame(ctx_rows, base, task.zones, task.imp, spec->include_base_feature).features;
    } else {
      const auto& m = dynamic_cast<const residual::BoostedModel&>(*f.model);
      ens = &m.ensemble();
      X = m.features(task, ctx_rows);
    }
    const auto rep = gbt::enforce_monotone_check(*ens, od::kDistanceFeature, grid, X);
    chk.add({f.name, std::to_string(X.rows), std::to_string(rep.pairs_checked), std::to_string(rep.violations),
             gbt::monotone_structure_ok(*ens) ? "true" : "false"});
    if (rep.violations) out.errors.push_back(f.name + ": monotone violations in the distance sweep");
  }
  return out;
}

inline PresetOutput preset_spatial_holdout(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  const auto& base = ctx.task(seed);
  auto& t = out.table("spatial_holdout", {"model", "mae", "rmse", "r2", "cpc"});
  const auto zero = residual::make_holdout_task(base, detail::zone_holdout(ctx.cfg, eval::MassPolicy::zero));
  std::string held;
  for (std::size_t i = 0; i < zero.is_held.size(); ++i)
    if (zero.is_held[i]) held += (held.empty() ? "" : " ") + std::to_string(zero.zones[i].id);
  out.notes.push_back("held-out zones: " + held);
  Bench bz(zero, ctx.options(seed), ctx.cfg.parallel);
  detail::metric_rows(out, t, bz, {"gravity_flow", "gravity_poi", "ppml", "xgb_direct", detail::kAmbit}, kCore);
  const auto imp =
      residual::make_holdout_task(base, detail::zone_holdout(ctx.cfg, eval::MassPolicy::borough_imputed));
  Bench bi(imp, ctx.options(seed), ctx.cfg.parallel);
  detail::metric_rows(out, t, bi, {"gravity_flow", "ppml"}, kCore,
                      {{"gravity_flow", "gravity flow imputed"}, {"ppml", "gravity ppml imputed"}});
  return out;
}

inline PresetOutput preset_borough_holdout(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  const auto& base = ctx.task(seed);
  auto boroughs = ctx.cfg.holdout.boroughs;
  if (boroughs.empty()) boroughs = base.zones.boroughs();
  auto& t = out.table("borough_holdout", {"model", "borough", "mae", "rmse", "r2", "cpc"});
  const std::vector<std::string> kinds{"gravity_flow", "gravity_poi", "ppml", "xgb_direct", detail::kAmbit};
  for (const auto& name : boroughs) {
    eval::HoldoutSpec h;
    h.mode = eval::HoldoutMode::borough;
    h.borough = name;
    h.seed = ctx.cfg.holdout.seed;
    h.mass_policy = eval::MassPolicy::zero;
    std::optional<residual::Task> ht;
    try {
      ht = residual::make_holdout_task(base, h);
    } catch (const std::exception& e) {
      out.errors.push_back("borough " + name + ": " + e.what());
      for (const auto& k : kinds)
        t.add(row_of({detail::kind_name(k), name},
                     metric_cells(std::nullopt, kCore)));
      continue;
    }
    Bench b(*ht, ctx.options(seed), ctx.cfg.parallel);
    detail::metric_rows(out, t, b, kinds, kCore, {}, {name});
  }
  return out;
}

inline PresetOutput preset_quantiles(Context& ctx) {
  PresetOutput out;
  auto& b = ctx.bench(ctx.cfg.seed());
  const auto y = eval::observed(b.task().test);
  auto& t = out.table("quantile_errors", {"Model", "Bin", "MAE", "RMSE", "sMAPE", "R2", "CPC"});
  auto& edges = out.table("quantile_edges", {"Bin", "Lower", "Upper", "Rows"});
  const std::vector<std::string> kinds{"ppml", "xgb_direct", detail::kAmbit};
  b.prefetch(kinds);
  bool edges_done = false;
  for (const auto& k : kinds) {
    const auto& f = b.get(k);
    if (!f.ok()) {
      out.errors.push_back(f.name + ": " + f.error);
      continue;
    }
    const auto q = eval::quantile_diagnostics(y, f.test_pred, 3);
    if (q.degenerate && !edges_done) out.notes.push_back("quantiles: degenerate flow distribution, single bin");
    for (const auto& bin : q.bins) {
      t.add(row_of({f.name, bin.label}, bin.rows.empty() ? metric_cells(std::nullopt, kFull)
                                                          : metric_cells(bin.metrics, kFull)));
      if (!edges_done) edges.add({bin.label, num(bin.lower), num(bin.upper), std::to_string(bin.rows.size())});
    }
    edges_done = true;
  }
  return out;
}

inline PresetOutput preset_xgb_sensitivity(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  auto& t = out.table("xgb_sensitivity", {"Model", "Setting", "mae", "rmse", "r2", "cpc"});
  const auto base = ctx.options(seed);
  auto low = base, deep = base;
  low.boost.learning_rate = base.boost.learning_rate * 0.5;
  low.boost.n_estimators = base.boost.n_estimators * 2;
  deep.boost.max_depth = base.boost.max_depth + base.boost.max_depth / 2;
  out.notes.push_back("low_lr: learning_rate x0.5, n_estimators x2; deep: max_depth x1.5");
  for (const auto& [label, opt] : std::vector<std::pair<std::string, residual::ModelOptions>>{
           {"base", base}, {"low_lr", low}, {"deep", deep}}) {
    Bench b(ctx.task(seed), opt, ctx.cfg.parallel);
    b.prefetch({"xgb_direct", detail::kAmbit});
    for (const auto& k : {std::string("xgb_direct"), detail::kAmbit}) {
      const auto& f = b.get(k);
      if (!f.ok()) out.errors.push_back(f.name + " (" + label + "): " + f.error);
      t.add(row_of({f.name, label}, metric_cells(f.metrics, kCore)));
    }
  }
  return out;
}

inline PresetOutput preset_filtering(Context& ctx) {
  PresetOutput out;
  const auto seed = ctx.cfg.seed();
  auto& stats = out.table("filter_stats", {"Setting", "Pairs", "Total flow", "Rows"});
  auto& t = out.table("filter_sensitivity", {"Setting", "Model", "mae", "rmse", "r2", "cpc"});
  for (double k : ctx.cfg.filter.sensitivity_top_k) {
    const auto label = detail::top_label(k);
    const auto task = make_task(ctx.cfg, ctx.data, seed, static_cast<std::size_t>(k));
    stats.add({label, std::to_string(task.filter_stats.pairs), std::to_string(task.filter_stats.total_flow),
               std::to_string(task.filter_stats.rows)});
    Bench b(task, ctx.options(seed), ctx.cfg.parallel);
    const std::vector<std::string> kinds{"ppml", "xgb_direct", detail::kAmbit};
    b.prefetch(kinds);
    for (const auto& kind : kinds) {
      const auto& f = b.get(kind);
      if (!f.ok()) out.errors.push_back(f.name + " (" + label + "): " + f.error);
      t.add(row_of({label, f.name}, metric_cells(f.metrics, kCore)));
    }
  }
  return out;
}

inline PresetOutput preset_runtime(Context& ctx) {
  PresetOutput out;
  // Sequential on a fresh bench so timings are not shared with other presets.
  Bench b(ctx.task(ctx.cfg.seed()), ctx.options(ctx.cfg.seed()), false);
  auto& t = out.table("runtime", {"Model", "Train time (s)", "Pred time (s)"}, true);
  for (const auto& k : {"gravity_flow", "ppml", "ppml_all", "ppml_fe", "xgb_direct", "ambit_gravity_poi"}) {
    const auto& f = b.get(k);
    if (!f.ok()) {
      out.errors.push_back(f.name + ": " + f.error);
      t.add({f.name, "NA", "NA"});
      continue;
    }
    t.add({f.name, fmt_num(f.timing.train_s, 3), fmt_num(f.timing.pred_s, 3)});
  }
  return out;
}

inline PresetOutput preset_count_baselines(Context& ctx) {
  PresetOutput out;
  auto& b = ctx.bench(ctx.cfg.seed());
  detail::metric_rows(out, out.table("count_baselines", {"model", "mae", "rmse", "r2", "cpc"}), b,
                      {"negbin", "zip"}, kCore);
  auto& cal = out.table("count_calibration", {"model", "decile", "rows", "mean_pred", "mean_obs"});
  const auto y = eval::observed(b.task().test);
  for (const auto& k : {"negbin", "zip"}) {
    const auto& f = b.get(k);
    if (!f.ok()) continue;
    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return f.test_pred[a] < f.test_pred[c]; });
    for (std::size_t dec = 0; dec < 10; ++dec) {
      const std::size_t lo = order.size() * dec / 10, hi = order.size() * (dec + 1) / 10;
      if (lo == hi) continue;
      double sp = 0, so = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        sp += f.test_pred[order[i]];
        so += y[order[i]];
      }
      const double m = static_cast<double>(hi - lo);
      cal.add({f.name, std::to_string(dec + 1), std::to_string(hi - lo), num(sp / m), num(so / m)});
    }
  }
  return out;
}

inline PresetOutput preset_fullmatrix(Context& ctx) {
  PresetOutput out;
  auto& b = ctx.bench(ctx.cfg.seed());
  const auto frame = full_matrix_frame(b.task());
  out.notes.push_back(kFullMatrixNote);
  out.notes.push_back("cells: " + std::to_string(frame.cells.size()) + " over " + std::to_string(frame.slots) +
                      " hour-of-week slots" + (frame.diagonal ? "" : ", diagonal excluded"));
  auto& t = out.table("physical_fullmatrix", {"model", "mae", "rmse", "smape", "r2", "cpc"});
  b.prefetch(fullmatrix_kinds());
  for (const auto& k : fullmatrix_kinds()) {
    const auto& f = b.get(k);
    std::optional<eval::Metrics> m;
    if (f.ok()) m = evaluate_full_matrix(*f.model, b.task(), frame);
    else out.errors.push_back(f.name + ": " + f.error);
    t.add(row_of({f.name}, metric_cells(m, kFull)));
  }
  return out;
}

using PresetFn = std::function<PresetOutput(Context&)>;

inline const std::vector<std::pair<std::string, PresetFn>>& presets() {
  static const std::vector<std::pair<std::string, PresetFn>> p{
      {"physical-audit", preset_physical_audit},
      {"main", preset_main},
      {"ppml-sensitivity", preset_ppml_sensitivity},
      {"zero-aug", preset_zero_aug},
      {"seeds", preset_seeds},
      {"anchor-ablation", preset_anchor_ablation},
      {"count-objectives", preset_count_objectives},
      {"base-feat-ablation", preset_base_feat_ablation},
      {"fe-fairness", preset_fe_fairness},
      {"impedance", preset_impedance},
      {"shap", preset_shap},
      {"cpc-sensitivity", preset_cpc_sensitivity},
      {"monotone", preset_monotone},
      {"spatial-holdout", preset_spatial_holdout},
      {"borough-holdout", preset_borough_holdout},
      {"quantiles", preset_quantiles},
      {"xgb-sensitivity", preset_xgb_sensitivity},
      {"filtering", preset_filtering},
      {"runtime", preset_runtime},
      {"count-baselines", preset_count_baselines},
      {"fullmatrix", preset_fullmatrix},
  };
  return p;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [n, f] : presets()) out.push_back(n);
  return out;
}

inline const PresetFn& find_preset(const std::string& name) {
  for (const auto& [n, f] : presets())
    if (n == name) return f;
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "'; available presets: " + list);
}

// Runs one preset and writes <out_root>/<name>/. Failed model fits are
// reported in the manifest and make the result not ok.
inline PresetOutput run_preset(const std::string& name, Context& ctx, const std::filesystem::path& out_root) {
  const auto& fn = find_preset(name);
  ctx.say("preset " + name);
  PresetOutput out;
  try {
    out = fn(ctx);
  } catch (const std::exception& e) {
    out.errors.push_back(e.what());
  }
  out.preset = name;
  write_output(out, ctx.cfg, out_root / name);
  return out;
}

}  // namespace ambit::experiment
