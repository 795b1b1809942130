#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ambit/eval/holdout.hpp"
#include "ambit/od/filter.hpp"
#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/split.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/spatial/constrained.hpp"
#include "ambit/util/error.hpp"

namespace ambit::residual {

struct TaskConfig {
  od::SplitSpec split;
  std::optional<od::HourStamp> train_start;  // defaults to the first observed hour
  std::int64_t min_total = 200;
  std::size_t top_k = 30000;
};

// Everything a model needs to be fitted and evaluated: the filtered task rows
// per window plus training-period masses and margins from the full table.
struct Task {
  od::ZoneTable zones;
  od::ImpedanceMatrix imp;
  od::FlowTable full;  // unfiltered, every window
  od::PairSet pairs;
  od::FilterStats filter_stats;
  od::MassSet mass;
  od::HourStamp train_start = 0;
  od::HourStamp train_end = 0;
  od::HourStamp val_end = 0;
  od::HourStamp test_end = 0;
  std::vector<od::FlowRow> train, val, test;
  spatial::HourlyMargins margins;
  std::vector<double> outflow;  // mean hourly training outflow
  std::uint64_t seed = 42;
  std::vector<bool> is_held;    // non-empty for spatial holdout tasks

  std::size_t n_zones() const { return zones.size(); }
  bool holdout() const { return !is_held.empty(); }
};

namespace detail {

inline std::vector<od::FlowRow> training_rows(const od::FlowTable& full, od::HourStamp start,
                                              od::HourStamp end,
                                              const std::vector<bool>& is_held) {
  std::vector<od::FlowRow> out;
  for (const auto& r : full) {
    if (r.hour < start || r.hour >= end) continue;
    if (!is_held.empty() && (is_held[r.origin] || is_held[r.dest])) continue;
    out.push_back(r);
  }
  return out;
}

inline void derive_training_state(Task& t) {
  const auto rows = training_rows(t.full, t.train_start, t.train_end, t.is_held);
  t.mass = od::make_mass_set(rows, t.zones, t.train_end);
  t.margins = spatial::compute_hourly_margins(rows, t.n_zones(), t.train_start, t.train_end);
  t.outflow = spatial::mean_hourly_outflow(rows, t.n_zones(), t.train_start, t.train_end);
}

}  // namespace detail

inline Task build_task(od::ZoneTable zones, od::FlowTable full, od::ImpedanceMatrix imp,
                       const TaskConfig& cfg) {
  cfg.split.validate();
  if (full.empty()) throw EmptyTaskError("flow table is empty");
  if (imp.n != zones.size()) throw Error("impedance matrix does not match the zone table");
  Task t;
  t.zones = std::move(zones);
  t.imp = std::move(imp);
  t.train_start = cfg.train_start.value_or(full.min_hour());
  t.train_end = cfg.split.train_end;
  t.val_end = cfg.split.val_end;
  t.test_end = cfg.split.test_end;
  if (t.train_start >= t.train_end) throw ConfigError("train_start must precede train_end");
  t.seed = cfg.split.seed;

  std::vector<od::FlowRow> windowed;
  for (const auto& r : full)
    if (r.hour >= t.train_start) windowed.push_back(r);
  t.full = od::FlowTable(std::move(windowed));

  auto filtered = od::filter_od_pairs(t.full, cfg.min_total, cfg.top_k, t.train_end);
  t.pairs = std::move(filtered.pairs);
  t.filter_stats = filtered.stats;
  const auto idx = od::split_and_sample(filtered.flows, cfg.split);
  t.train = od::gather(filtered.flows, idx.train);
  t.val = od::gather(filtered.flows, idx.val);
  t.test = od::gather(filtered.flows, idx.test);
  detail::derive_training_state(t);
  return t;
}

// Rows touching held-out zones leave train/val and form the test set; flow
// masses, margins and outflows are recomputed without them and the mass
// policy decides what the held-out zones receive.
inline Task make_holdout_task(const Task& base, const eval::HoldoutSpec& spec) {
  const auto held = eval::select_holdout_zones(base.zones, spec);
  auto split = eval::split_holdout(base.train, base.test, base.n_zones(), held);
  Task t;
  t.zones = base.zones;
  t.imp = base.imp;
  t.full = base.full;
  t.pairs = base.pairs;
  t.filter_stats = base.filter_stats;
  t.train_start = base.train_start;
  t.train_end = base.train_end;
  t.val_end = base.val_end;
  t.test_end = base.test_end;
  t.seed = base.seed;
  t.is_held = split.is_held;
  t.train = std::move(split.train);
  t.test = std::move(split.eval);
  for (const auto& r : base.val)
    if (!t.is_held[r.origin] && !t.is_held[r.dest]) t.val.push_back(r);
  if (t.train.empty() || t.val.empty())
    throw EmptyTaskError("holdout leaves no training or validation rows");
  detail::derive_training_state(t);
  t.mass.out = eval::apply_mass_policy(t.mass.out, t.zones, t.is_held, spec.mass_policy);
  t.mass.in = eval::apply_mass_policy(t.mass.in, t.zones, t.is_held, spec.mass_policy);
  return t;
}

}  // namespace ambit::residual
