#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ambit/util/csv.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/format.hpp"

namespace ambit::od {

using ZoneIndex = std::uint32_t;

enum class PoiCategory : int { amenity = 0, shop = 1, office = 2 };
inline constexpr std::array<PoiCategory, 3> kPoiCategories{PoiCategory::amenity, PoiCategory::shop,
                                                           PoiCategory::office};

inline const char* to_string(PoiCategory c) {
  switch (c) {
    case PoiCategory::amenity: return "amenity";
    case PoiCategory::shop: return "shop";
    case PoiCategory::office: return "office";
  }
  return "?";
}

struct Zone {
  int id = 0;
  double x_m = 0;
  double y_m = 0;
  double area_km2 = 1;
  std::string borough;
  std::array<std::int64_t, 3> poi{0, 0, 0};

  std::int64_t poi_count(PoiCategory c) const { return poi[static_cast<int>(c)]; }
  std::int64_t poi_total() const { return poi[0] + poi[1] + poi[2]; }
  double poi_density(PoiCategory c) const { return static_cast<double>(poi_count(c)) / area_km2; }
  double poi_total_density() const { return static_cast<double>(poi_total()) / area_km2; }
};

// Zones in insertion order; a zone's position is its ZoneIndex.
class ZoneTable {
 public:
  ZoneTable() = default;

  explicit ZoneTable(std::vector<Zone> zones) : zones_(std::move(zones)) {
    for (std::size_t i = 0; i < zones_.size(); ++i) {
      const Zone& z = zones_[i];
      if (!(z.area_km2 > 0) || !std::isfinite(z.area_km2))
        throw Error("zone " + std::to_string(z.id) + ": area_km2 must be positive");
      if (!std::isfinite(z.x_m) || !std::isfinite(z.y_m))
        throw Error("zone " + std::to_string(z.id) + ": centroid must be finite");
      for (auto c : z.poi)
        if (c < 0) throw Error("zone " + std::to_string(z.id) + ": negative POI count");
      if (!index_.emplace(z.id, static_cast<ZoneIndex>(i)).second)
        throw Error("duplicate zone_id " + std::to_string(z.id));
    }
  }

  std::size_t size() const { return zones_.size(); }
  bool empty() const { return zones_.empty(); }
  const Zone& operator[](std::size_t i) const { return zones_[i]; }
  const std::vector<Zone>& zones() const { return zones_; }

  std::optional<ZoneIndex> index_of(int zone_id) const {
    auto it = index_.find(zone_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> boroughs() const {
    std::vector<std::string> out;
    for (const auto& z : zones_)
      if (std::find(out.begin(), out.end(), z.borough) == out.end()) out.push_back(z.borough);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<Zone> zones_;
  std::unordered_map<int, ZoneIndex> index_;
};

inline ZoneTable read_zones(std::istream& in) {
  CsvReader csv(in);
  if (csv.empty_header()) throw IngestError("zones file is empty");
  const auto c_id = csv.require("zone_id");
  const auto c_x = csv.require("centroid_x_m");
  const auto c_y = csv.require("centroid_y_m");
  const auto c_area = csv.require("area_km2");
  const auto c_borough = csv.require("borough");
  const auto c_amenity = csv.require("poi_amenity");
  const auto c_shop = csv.require("poi_shop");
  const auto c_office = csv.require("poi_office");
  std::vector<Zone> zones;
  std::vector<std::string> f;
  while (csv.next(f)) {
    Zone z;
    z.id = static_cast<int>(parse_int(f[c_id], "zone_id"));
    z.x_m = parse_double(f[c_x], "centroid_x_m");
    z.y_m = parse_double(f[c_y], "centroid_y_m");
    z.area_km2 = parse_double(f[c_area], "area_km2");
    z.borough = f[c_borough];
    z.poi = {parse_int(f[c_amenity], "poi_amenity"), parse_int(f[c_shop], "poi_shop"),
             parse_int(f[c_office], "poi_office")};
    zones.push_back(std::move(z));
  }
  return ZoneTable(std::move(zones));
}

inline void write_zones(std::ostream& out, const ZoneTable& zones) {
  out << "zone_id,centroid_x_m,centroid_y_m,area_km2,borough,poi_amenity,poi_shop,poi_office\n";
  for (const auto& z : zones.zones()) {
    out << z.id << ',' << fmt_num(z.x_m, 3) << ',' << fmt_num(z.y_m, 3) << ','
        << fmt_num(z.area_km2, 6) << ',' << csv_escape(z.borough) << ',' << z.poi[0] << ','
        << z.poi[1] << ',' << z.poi[2] << '\n';
  }
}

}  // namespace ambit::od
