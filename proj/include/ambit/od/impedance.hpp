#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ambit/od/ingest.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/stats.hpp"

namespace ambit::od {

enum class ImpedanceSource { euclidean_centroid, travel_time_proxy };

inline constexpr double kDistanceFloor = 0.1;

// Dense n x n impedance, row-major: km for euclidean, minutes for travel time.
struct ImpedanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;
  ImpedanceSource source = ImpedanceSource::euclidean_centroid;
  double coverage = 1.0;
  double floor = kDistanceFloor;

  double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }
};

inline double centroid_km(const Zone& a, const Zone& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m) / 1000.0;
}

inline ImpedanceMatrix euclidean_impedance(const ZoneTable& zones, double floor = kDistanceFloor) {
  if (zones.empty()) throw Error("impedance needs at least one zone");
  ImpedanceMatrix m;
  m.n = zones.size();
  m.floor = floor;
  m.d.resize(m.n * m.n);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j)
      m.at(i, j) = std::max(floor, centroid_km(zones[i], zones[j]));
  return m;
}

// Median observed minutes per directed OD pair; uncovered pairs fall back to
// euclidean km times the median minutes-per-km over covered pairs.
inline ImpedanceMatrix travel_time_impedance(const ZoneTable& zones,
                                             std::span<const TripRecord> trips,
                                             double floor = kDistanceFloor) {
  if (zones.empty()) throw Error("impedance needs at least one zone");
  const auto eu = euclidean_impedance(zones, floor);
  std::map<std::pair<ZoneIndex, ZoneIndex>, std::vector<double>> durations;
  for (const auto& t : trips) {
    const auto o = zones.index_of(t.pu_zone);
    const auto d = zones.index_of(t.do_zone);
    if (!o || !d || !(t.minutes > 0)) continue;
    durations[{*o, *d}].push_back(t.minutes);
  }
  if (durations.empty()) throw Error("travel-time impedance needs trips with durations");

  ImpedanceMatrix m;
  m.n = zones.size();
  m.floor = floor;
  m.source = ImpedanceSource::travel_time_proxy;
  m.d.assign(m.n * m.n, -1.0);
  std::vector<double> pace;
  for (auto& [p, v] : durations) {
    const double med = median(std::move(v));
    m.at(p.first, p.second) = std::max(floor, med);
    pace.push_back(med / eu(p.first, p.second));
  }
  const double mpk = median(pace);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) {
      if (m.at(i, j) >= 0) {
        ++covered;
      } else {
        m.at(i, j) = std::max(floor, eu(i, j) * mpk);
      }
    }
  m.coverage = static_cast<double>(covered) / static_cast<double>(m.n * m.n);
  return m;
}

inline ImpedanceMatrix build_impedance(const ZoneTable& zones, ImpedanceSource source,
                                       std::optional<std::span<const TripRecord>> trips = {}) {
  if (source == ImpedanceSource::euclidean_centroid) return euclidean_impedance(zones);
  if (!trips) throw Error("travel-time impedance requires trip records");
  return travel_time_impedance(zones, *trips);
}

}  // namespace ambit::od
