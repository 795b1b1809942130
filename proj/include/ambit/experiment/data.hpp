#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/experiment/config.hpp"
#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/ingest.hpp"
#include "ambit/od/synthetic.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/residual/models.hpp"
#include "ambit/residual/task.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/random.hpp"

namespace ambit::experiment {

struct Dataset {
  od::ZoneTable zones;
  od::FlowTable flows;
  od::ImpedanceMatrix imp;
  std::vector<od::TripRecord> trips;  // empty unless a trips file was given
  nlohmann::json info;
};

inline od::SyntheticConfig synthetic_config(const SyntheticSection& s) {
  od::SyntheticConfig c;
  c.n_zones = s.n_zones;
  c.n_hours = 24 * 7 * s.weeks;
  c.start = od::parse_hour(s.start);
  c.side_km = s.side_km;
  c.n_boroughs = s.n_boroughs;
  c.target_mean = s.target_mean;
  c.alpha = s.alpha;
  c.gamma = s.gamma;
  c.beta = s.beta;
  if (s.decay == "power") c.decay_form = od::DecayForm::power;
  else if (s.decay == "exponential") c.decay_form = od::DecayForm::exponential;
  else throw ConfigError("synthetic.decay must be \"power\" or \"exponential\"");
  c.temporal_amplitude = s.temporal_amplitude;
  c.poi_effect = s.poi_effect;
  c.origin_effect_sd = s.origin_effect_sd;
  c.zero_inflation = s.zero_inflation;
  c.poi_log_sd = s.poi_log_sd;
  c.intrazonal = s.intrazonal;
  c.seed = s.seed;
  return c;
}

namespace detail {

inline std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IngestError(std::string("cannot open ") + what + " file '" + path + "'");
  return in;
}

}  // namespace detail

inline Dataset load_dataset(const ExperimentConfig& c) {
  Dataset d;
  if (c.data.source == "synthetic") {
    auto city = od::generate_synthetic_city(synthetic_config(c.synthetic));
    d.zones = std::move(city.zones);
    d.flows = std::move(city.flows);
    d.info = {{"source", "synthetic"}, {"k", city.k}};
  } else {
    auto zin = detail::open_input(c.data.zones, "zones");
    d.zones = od::read_zones(zin);
    auto fin = detail::open_input(c.data.flows, "flows");
    d.flows = od::read_flows(fin, d.zones);
    if (!c.data.trips.empty()) {
      auto tin = detail::open_input(c.data.trips, "trips");
      d.trips = od::read_trips(tin);
    }
    d.info = {{"source", "files"}, {"zones", c.data.zones}, {"flows", c.data.flows},
              {"trips", c.data.trips}};
  }
  if (d.flows.empty()) throw EmptyTaskError("dataset has no flow rows");
  d.imp = od::euclidean_impedance(d.zones);
  d.info["zones_n"] = d.zones.size();
  d.info["flow_rows"] = d.flows.size();
  return d;
}

inline od::SplitSpec split_spec(const ExperimentConfig& c, const Dataset& d, std::uint64_t seed) {
  od::SplitSpec s;
  const od::HourStamp week = 24 * 7;
  s.test_end = c.split.test_end.empty() ? d.flows.max_hour() + 1 : od::parse_hour(c.split.test_end);
  s.val_end = c.split.val_end.empty() ? s.test_end - week : od::parse_hour(c.split.val_end);
  s.train_end = c.split.train_end.empty() ? s.val_end - week : od::parse_hour(c.split.train_end);
  s.sampling = c.split.sampling == "random" ? od::Sampling::random : od::Sampling::stratified_by_flow;
  s.max_train_rows = c.split.max_train_rows;
  s.max_eval_rows = c.split.max_eval_rows;
  s.seed = seed;
  s.validate();
  return s;
}

inline residual::TaskConfig task_config(const ExperimentConfig& c, const Dataset& d,
                                        std::uint64_t seed) {
  residual::TaskConfig t;
  t.split = split_spec(c, d, seed);
  if (!c.split.train_start.empty()) t.train_start = od::parse_hour(c.split.train_start);
  t.min_total = c.filter.min_total;
  t.top_k = c.filter.top_k;
  return t;
}

inline residual::Task make_task(const ExperimentConfig& c, const Dataset& d, std::uint64_t seed,
                                std::size_t top_k = 0) {
  auto tc = task_config(c, d, seed);
  if (top_k) tc.top_k = top_k;
  return residual::build_task(d.zones, d.flows, d.imp, tc);
}

inline gbt::BoostConfig boost_config(const BoostSection& b, std::uint64_t seed) {
  gbt::BoostConfig g;
  g.n_estimators = b.n_estimators;
  g.max_depth = b.max_depth;
  g.learning_rate = b.learning_rate;
  g.subsample = b.subsample;
  g.colsample = b.colsample;
  g.early_stopping_rounds = b.early_stopping_rounds;
  g.min_child_weight = b.min_child_weight;
  g.lambda = b.lambda;
  g.max_bins = b.max_bins;
  g.tweedie_power = b.tweedie_power;
  g.seed = seed;
  g.validate();
  return g;
}

inline residual::ModelOptions model_options(const ExperimentConfig& c, std::uint64_t seed) {
  residual::ModelOptions o;
  o.boost = boost_config(c.boost, seed);
  o.zero_aug.sampled_hours = c.ppml.sampled_hours;
  o.zero_aug.zero_budget = c.ppml.zero_budget;
  o.fe_max_rows = c.ppml.fe_max_rows;
  o.count_max_rows = c.ppml.count_max_rows;
  o.beta_power = c.grids.beta_power;
  o.beta_exp = c.grids.beta_exp;
  o.gamma = c.grids.gamma;
  o.rho = c.grids.rho;
  o.delta = c.grids.delta;
  return o;
}

// Observed trip durations when a trips file is configured; otherwise trips
// synthesized from a sample of training rows.
inline od::ImpedanceMatrix travel_time_matrix(const ExperimentConfig& c, const Dataset& d,
                                              const residual::Task& t) {
  if (!d.trips.empty()) return od::travel_time_impedance(d.zones, d.trips);
  Rng rng(derive_seed(t.seed, 61));
  std::vector<od::FlowRow> rows;
  for (auto k : sample_without_replacement(t.train.size(), c.impedance.trip_rows, rng))
    rows.push_back(t.train[k]);
  od::TripSynthesisConfig tc;
  tc.speed_kmh = c.impedance.speed_kmh;
  tc.duration_noise = c.impedance.duration_noise;
  tc.seed = derive_seed(t.seed, 62);
  const auto trips = od::synthesize_trips(od::FlowTable(std::move(rows)), d.zones, tc);
  return od::travel_time_impedance(d.zones, trips);
}

}  // namespace ambit::experiment
