#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/time.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/feature_matrix.hpp"

namespace ambit::od {

inline constexpr const char* kBaseFeature = "log1p_base";
inline constexpr const char* kDistanceFeature = "distance_km";

// Spatial, POI and temporal columns shared by direct and residual learners.
inline std::vector<std::string> interpretable_feature_names() {
  return {kDistanceFeature,     "o_x_km",           "o_y_km",          "d_x_km",
          "d_y_km",             "o_area_km2",       "d_area_km2",      "o_poi_density",
          "d_poi_density",      "o_amenity_density", "o_shop_density", "o_office_density",
          "d_amenity_density",  "d_shop_density",   "d_office_density", "hour_of_day",
          "day_of_week",        "month",            "is_weekend",      "hour_of_week"};
}

// Builds the interpretable feature block, plus log1p(baseline) as the last
// column when `baseline` is given.
inline FeatureMatrix build_features(std::span<const FlowRow> rows, const ZoneTable& zones,
                                    const ImpedanceMatrix& imp,
                                    std::optional<std::span<const double>> baseline = {}) {
  auto names = interpretable_feature_names();
  if (baseline) {
    if (baseline->size() != rows.size()) throw Error("baseline length does not match rows");
    names.push_back(kBaseFeature);
  }
  FeatureMatrix fm(std::move(names), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const Zone& o = zones[row.origin];
    const Zone& d = zones[row.dest];
    const auto t = temporal_features(row.hour);
    double* out = fm.data.data() + r * fm.cols();
    out[0] = imp(row.origin, row.dest);
    out[1] = o.x_m / 1000.0;
    out[2] = o.y_m / 1000.0;
    out[3] = d.x_m / 1000.0;
    out[4] = d.y_m / 1000.0;
    out[5] = o.area_km2;
    out[6] = d.area_km2;
    out[7] = o.poi_total_density();
    out[8] = d.poi_total_density();
    out[9] = o.poi_density(PoiCategory::amenity);
    out[10] = o.poi_density(PoiCategory::shop);
    out[11] = o.poi_density(PoiCategory::office);
    out[12] = d.poi_density(PoiCategory::amenity);
    out[13] = d.poi_density(PoiCategory::shop);
    out[14] = d.poi_density(PoiCategory::office);
    out[15] = t.hour_of_day;
    out[16] = t.day_of_week;
    out[17] = t.month;
    out[18] = t.is_weekend;
    out[19] = t.hour_of_week;
    if (baseline) {
      const double b = (*baseline)[r];
      if (!std::isfinite(b) || b < 0)
        throw Error("baseline prediction at row " + std::to_string(r) + " is not finite and >= 0");
      out[20] = std::log1p(b);
    }
  }
  return fm;
}

}  // namespace ambit::od
