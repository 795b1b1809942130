#pragma once

#include <span>
#include <string>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/error.hpp"

namespace ambit::od {

enum class MassDefinition { flow_out_total, flow_in_total, poi_total };

inline const char* to_string(MassDefinition d) {
  switch (d) {
    case MassDefinition::flow_out_total: return "flow_out_total";
    case MassDefinition::flow_in_total: return "flow_in_total";
    case MassDefinition::poi_total: return "poi_total";
  }
  return "?";
}

inline constexpr double kMassEpsilon = 1.0;

struct MassVector {
  std::vector<double> m;
  MassDefinition definition = MassDefinition::poi_total;
  bool training_only = true;

  double operator[](std::size_t i) const { return m[i]; }
  std::size_t size() const { return m.size(); }
};

// Flow masses sum rows with hour < train_end; every entry gets +epsilon.
inline MassVector make_masses(std::span<const FlowRow> rows, const ZoneTable& zones,
                              MassDefinition def, HourStamp train_end,
                              double epsilon = kMassEpsilon) {
  MassVector mv;
  mv.definition = def;
  mv.m.assign(zones.size(), epsilon);
  switch (def) {
    case MassDefinition::flow_out_total:
      for (const auto& r : rows)
        if (r.hour < train_end) mv.m[r.origin] += static_cast<double>(r.flow);
      break;
    case MassDefinition::flow_in_total:
      for (const auto& r : rows)
        if (r.hour < train_end) mv.m[r.dest] += static_cast<double>(r.flow);
      break;
    case MassDefinition::poi_total:
      mv.training_only = false;
      for (std::size_t i = 0; i < zones.size(); ++i)
        mv.m[i] += static_cast<double>(zones[i].poi_total());
      break;
  }
  return mv;
}

inline MassVector make_masses(const FlowTable& flows, const ZoneTable& zones, MassDefinition def,
                              HourStamp train_end, double epsilon = kMassEpsilon) {
  return make_masses(flows.rows(), zones, def, train_end, epsilon);
}

// The three mass vectors every baseline draws from.
struct MassSet {
  MassVector out;
  MassVector in;
  MassVector poi;
};

inline MassSet make_mass_set(std::span<const FlowRow> rows, const ZoneTable& zones,
                             HourStamp train_end) {
  return {make_masses(rows, zones, MassDefinition::flow_out_total, train_end),
          make_masses(rows, zones, MassDefinition::flow_in_total, train_end),
          make_masses(rows, zones, MassDefinition::poi_total, train_end)};
}

}  // namespace ambit::od
