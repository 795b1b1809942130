#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ambit/ambit.hpp"

namespace fs = std::filesystem;
using namespace ambit;
using namespace ambit::experiment;

namespace {

struct Common {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  bool parallel = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config file (key = value, [section] headers)");
  cmd->add_option("--seed", c.seeds, "seed list; overrides the config (repeat or comma-separate)")
      ->delimiter(',');
  cmd->add_option("--out", c.out, "output root (default: $AMBIT_OUT, then the config's out)");
  cmd->add_flag("--parallel", c.parallel, "fit independent models concurrently");
  cmd->add_option("--set", c.overrides, "override a config key, e.g. --set boost.max_depth=6");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  if (!c.seeds.empty()) cfg.seeds = c.seeds;
  if (c.parallel) cfg.parallel = true;
  if (!c.out.empty()) cfg.out = c.out;
  else if (const char* env = std::getenv("AMBIT_OUT"); env && *env) cfg.out = env;
  validate(cfg);
  return cfg;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  fs::create_directories(p.parent_path());
  write_text(p, j.dump(2) + "\n");
}

int cmd_synth(const Common& c, bool with_trips) {
  const auto cfg = resolve(c);
  const auto city = od::generate_synthetic_city(synthetic_config(cfg.synthetic));
  const fs::path dir = fs::path(cfg.out) / "synth";
  fs::create_directories(dir);
  std::ofstream z(dir / "zones.csv"), f(dir / "flows.csv");
  od::write_zones(z, city.zones);
  od::write_flows(f, city.flows, city.zones);
  write_json(dir / "manifest.json", city.manifest);
  if (with_trips) {
    std::ofstream t(dir / "trips.csv");
    od::TripSynthesisConfig tc;
    tc.speed_kmh = cfg.impedance.speed_kmh;
    tc.duration_noise = cfg.impedance.duration_noise;
    od::write_trips(t, od::synthesize_trips(city.flows, city.zones, tc));
  }
  std::cout << "wrote " << city.zones.size() << " zones and " << city.flows.size() << " flow rows to "
            << dir.string() << "\n";
  return 0;
}

int cmd_ingest(const Common& c, const std::string& trips, const std::string& zones_path,
               const od::TripFilter& filter) {
  const auto cfg = resolve(c);
  std::ifstream zin(zones_path);
  if (!zin) throw IngestError("cannot open zones file '" + zones_path + "'");
  const auto zones = od::read_zones(zin);
  std::ifstream tin(trips);
  if (!tin) throw IngestError("cannot open trips file '" + trips + "'");
  const auto res = od::ingest_trips(tin, zones, filter);
  const fs::path dir = fs::path(cfg.out) / "ingest";
  fs::create_directories(dir);
  std::ofstream f(dir / "flows.csv");
  od::write_flows(f, res.flows, zones);
  write_json(dir / "ingest_report.json", {{"read", res.read}, {"accepted", res.accepted},
                                          {"filtered", res.filtered}, {"rejected_zone", res.rejected_zone},
                                          {"flow_rows", res.flows.size()}});
  std::cout << "read " << res.read << " trips, kept " << res.accepted << ", wrote " << res.flows.size()
            << " flow rows to " << (dir / "flows.csv").string() << "\n";
  return 0;
}

void check_kinds(const std::vector<std::string>& kinds) {
  const auto known = known_kinds();
  for (const auto& k : kinds)
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      std::string list;
      for (const auto& n : known) list += (list.empty() ? "" : ", ") + n;
      throw ConfigError("unknown model '" + k + "'; available models: " + list);
    }
}

int cmd_fit(const Common& c, const std::string& kind) {
  const auto cfg = resolve(c);
  check_kinds({kind});
  const auto data = load_dataset(cfg);
  Context ctx(cfg, data, &std::cerr);
  auto& b = ctx.bench(cfg.seed());
  const auto& f = b.get(kind);
  if (!f.ok()) {
    std::cerr << "error: " << f.name << ": " << f.error << "\n";
    return 1;
  }
  const fs::path dir = fs::path(cfg.out) / "fit";
  if (const auto* a = dynamic_cast<const residual::AmbitModel*>(f.model.get())) {
    const std::string base = kind + ".baseline.json", ens = kind + ".ensemble.json";
    write_json(dir / base, a->baseline()->to_json());
    write_json(dir / ens, gbt::to_json(a->ensemble()));
    write_json(dir / (kind + ".json"), a->manifest(base, ens));
  } else {
    write_json(dir / (kind + ".json"), f.model->to_json());
  }
  std::cout << f.name << ": test mae " << fmt_num(f.metrics->mae) << " rmse " << fmt_num(f.metrics->rmse)
            << " cpc " << fmt_num(f.metrics->cpc) << "\n";
  return 0;
}

// reports.csv follows the metric report schema: one row per model on the
// test split plus one per seed when several seeds are given.
int cmd_eval(const Common& c, std::vector<std::string> kinds) {
  const auto cfg = resolve(c);
  if (kinds.empty()) kinds = cfg.models;
  check_kinds(kinds);
  const auto data = load_dataset(cfg);
  Context ctx(cfg, data, &std::cerr);
  Table reports{"reports",
                {"model", "split", "group", "mae", "rmse", "r2", "smape", "cpc", "train_s", "pred_s"}, {}, true};
  PresetOutput out;
  out.preset = "eval";
  for (auto seed : cfg.seeds) {
    auto& b = ctx.bench(seed);
    b.prefetch(kinds);
    for (const auto& k : kinds) {
      const auto& f = b.get(k);
      if (!f.ok()) out.errors.push_back(f.name + " (seed " + std::to_string(seed) + "): " + f.error);
      auto cells = metric_cells(f.metrics, {Col::mae, Col::rmse, Col::r2, Col::smape, Col::cpc});
      cells.push_back(f.ok() ? fmt_num(f.timing.train_s, 3) : "NA");
      cells.push_back(f.ok() ? fmt_num(f.timing.pred_s, 3) : "NA");
      reports.add(row_of({f.name, "test", "seed=" + std::to_string(seed)}, cells));
      if (f.ok() && seed == cfg.seed()) {
        auto& z = out.table("zone_errors_" + k, {"zone_id", "mae", "smape"});
        for (const auto& e : eval::zone_errors(b.task().test, f.test_pred))
          z.add({std::to_string(b.task().zones[e.zone].id), num(e.mae), num(e.smape)});
      }
    }
  }
  out.tables.push_front(std::move(reports));
  write_output(out, cfg, fs::path(cfg.out) / "eval");
  std::cout << out.tables.front().csv();
  for (const auto& e : out.errors) std::cerr << "error: " << e << "\n";
  return out.ok() ? 0 : 1;
}

int run_presets(const Common& c, const std::vector<std::string>& names, const std::string& dir_override = {}) {
  const auto cfg = resolve(c);
  for (const auto& n : names) (void)find_preset(n);
  const auto data = load_dataset(cfg);
  bool ok = true;
  for (const auto& n : names) {
    Context ctx(cfg, data, &std::cerr);
    PresetOutput out;
    if (dir_override.empty()) {
      out = run_preset(n, ctx, cfg.out);
    } else {
      try {
        out = find_preset(n)(ctx);
      } catch (const std::exception& e) {
        out.errors.push_back(e.what());
      }
      out.preset = n;
      write_output(out, cfg, fs::path(cfg.out) / dir_override);
    }
    for (const auto& e : out.errors) std::cerr << "error: " << n << ": " << e << "\n";
    std::cout << n << ": " << (out.ok() ? "ok" : "failed") << " -> "
              << (fs::path(cfg.out) / (dir_override.empty() ? n : dir_override)).string() << "\n";
    ok = ok && out.ok();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMBIT: physics-anchored OD flow experiments"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "generate the synthetic city (zones.csv, flows.csv, manifest.json)");
  add_common(synth, common);
  bool with_trips = false;
  synth->add_flag("--trips", with_trips, "also write trip records expanded from the flows");

  auto* ingest = app.add_subcommand("ingest", "aggregate trip records into hourly OD flows");
  add_common(ingest, common);
  std::string trips_path, zones_path;
  od::TripFilter filter;
  ingest->add_option("--trips", trips_path, "trip records CSV")->required();
  ingest->add_option("--zones", zones_path, "zone table CSV")->required();
  ingest->add_option("--min-minutes", filter.min_minutes);
  ingest->add_option("--max-minutes", filter.max_minutes);
  ingest->add_option("--min-km", filter.min_km);
  ingest->add_option("--max-km", filter.max_km);

  auto* fit = app.add_subcommand("fit", "fit one model on the configured task and save it");
  add_common(fit, common);
  std::string fit_kind = "ambit_gravity_poi";
  fit->add_option("--model", fit_kind, "model kind");

  auto* evalc = app.add_subcommand("eval", "fit and score models; writes reports.csv and per-zone errors");
  add_common(evalc, common);
  std::vector<std::string> eval_kinds;
  evalc->add_option("--model", eval_kinds, "model kinds (default: the config's models)")->delimiter(',');

  auto* preset = app.add_subcommand("preset", "run a named experiment preset ('all' runs every preset)");
  add_common(preset, common);
  std::string preset_name;
  preset->add_option("name", preset_name, "preset name")->required();

  auto* explain = app.add_subcommand("explain", "TreeSHAP attributions for the AMBIT residual model");
  add_common(explain, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(common, with_trips);
    if (*ingest) return cmd_ingest(common, trips_path, zones_path, filter);
    if (*fit) return cmd_fit(common, fit_kind);
    if (*evalc) return cmd_eval(common, eval_kinds);
    if (*preset) {
      if (preset_name == "all") return run_presets(common, preset_names());
      return run_presets(common, {preset_name});
    }
    if (*explain) return run_presets(common, {"shap"}, "explain");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
