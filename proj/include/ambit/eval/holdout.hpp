#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/random.hpp"

namespace ambit::eval {

enum class HoldoutMode { zone_fraction, borough };
enum class MassPolicy { zero, borough_imputed };

inline const char* to_string(MassPolicy p) { return p == MassPolicy::zero ? "zero" : "borough_imputed"; }

struct HoldoutSpec {
  HoldoutMode mode = HoldoutMode::zone_fraction;
  double fraction = 0.10;
  std::string borough;
  MassPolicy mass_policy = MassPolicy::zero;
  std::uint64_t seed = 42;

  void validate() const {
    if (mode == HoldoutMode::zone_fraction && !(fraction > 0 && fraction < 1))
      throw ConfigError("holdout fraction must be in (0, 1)");
    if (mode == HoldoutMode::borough && borough.empty())
      throw ConfigError("borough holdout needs a borough label");
  }
};

struct HoldoutSplit {
  std::vector<od::ZoneIndex> held_out;  // sorted
  std::vector<bool> is_held;            // per zone
  std::vector<od::FlowRow> train;       // rows touching no held-out zone
  std::vector<od::FlowRow> eval;        // rows touching at least one held-out zone
};

inline std::vector<od::ZoneIndex> select_holdout_zones(const od::ZoneTable& zones,
                                                       const HoldoutSpec& spec) {
  spec.validate();
  std::vector<od::ZoneIndex> out;
  if (spec.mode == HoldoutMode::borough) {
    for (std::size_t i = 0; i < zones.size(); ++i)
      if (zones[i].borough == spec.borough) out.push_back(static_cast<od::ZoneIndex>(i));
    if (out.empty()) throw ConfigError("no zones in borough '" + spec.borough + "'");
    if (out.size() == zones.size()) throw ConfigError("borough holdout would remove every zone");
    return out;
  }
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(zones.size()))));
  if (k >= zones.size()) throw ConfigError("not enough zones to hold out");
  Rng rng(derive_seed(spec.seed, 41));
  for (auto i : sample_without_replacement(zones.size(), k, rng)) out.push_back(static_cast<od::ZoneIndex>(i));
  return out;
}

// `train_rows` and `eval_rows` are the task's training and test windows.
inline HoldoutSplit split_holdout(std::span<const od::FlowRow> train_rows,
                                  std::span<const od::FlowRow> eval_rows, std::size_t n_zones,
                                  std::vector<od::ZoneIndex> held) {
  HoldoutSplit s;
  std::sort(held.begin(), held.end());
  s.held_out = held;
  s.is_held.assign(n_zones, false);
  for (auto z : held) s.is_held[z] = true;
  for (const auto& r : train_rows)
    if (!s.is_held[r.origin] && !s.is_held[r.dest]) s.train.push_back(r);
  for (const auto& r : eval_rows)
    if (s.is_held[r.origin] || s.is_held[r.dest]) s.eval.push_back(r);
  if (s.eval.empty()) throw EmptyTaskError("holdout evaluation set is empty");
  return s;
}

// Flow masses of held-out zones become epsilon (zero policy) or the mean of
// same-borough training zones, falling back to the mean of all training zones.
inline od::MassVector apply_mass_policy(od::MassVector mass, const od::ZoneTable& zones,
                                        const std::vector<bool>& is_held, MassPolicy policy,
                                        double epsilon = od::kMassEpsilon) {
  if (mass.definition == od::MassDefinition::poi_total) return mass;
  if (policy == MassPolicy::zero) {
    for (std::size_t i = 0; i < mass.m.size(); ++i)
      if (is_held[i]) mass.m[i] = epsilon;
    return mass;
  }
  std::map<std::string, std::pair<double, std::size_t>> by_borough;
  double all = 0;
  std::size_t all_n = 0;
  for (std::size_t i = 0; i < mass.m.size(); ++i) {
    if (is_held[i]) continue;
    auto& b = by_borough[zones[i].borough];
    b.first += mass.m[i];
    ++b.second;
    all += mass.m[i];
    ++all_n;
  }
  for (std::size_t i = 0; i < mass.m.size(); ++i) {
    if (!is_held[i]) continue;
    auto it = by_borough.find(zones[i].borough);
    if (it != by_borough.end() && it->second.second > 0)
      mass.m[i] = it->second.first / static_cast<double>(it->second.second);
    else
      mass.m[i] = all_n ? all / static_cast<double>(all_n) : epsilon;
  }
  return mass;
}

}  // namespace ambit::eval
