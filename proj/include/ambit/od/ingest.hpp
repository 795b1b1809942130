#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "ambit/od/flows.hpp"
#include "ambit/od/time.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/csv.hpp"
#include "ambit/util/format.hpp"

namespace ambit::od {

struct TripRecord {
  std::int64_t pickup_s = 0;
  std::int64_t dropoff_s = 0;
  int pu_zone = 0;
  int do_zone = 0;
  double minutes = 0;
  double km = 0;
};

// Inclusive bounds; trips outside either interval are dropped.
struct TripFilter {
  double min_minutes = 1.0;
  double max_minutes = 180.0;
  double min_km = 0.1;
  double max_km = 100.0;

  void validate() const {
    if (!(min_minutes > 0 && max_minutes >= min_minutes && min_km > 0 && max_km >= min_km))
      throw ConfigError("trip filter bounds must be positive and ordered");
  }
  bool accepts(const TripRecord& t) const {
    return t.minutes >= min_minutes && t.minutes <= max_minutes && t.km >= min_km &&
           t.km <= max_km;
  }
};

struct IngestResult {
  FlowTable flows;
  std::size_t read = 0;
  std::size_t accepted = 0;
  std::size_t filtered = 0;        // outside duration/distance bounds
  std::size_t rejected_zone = 0;   // unknown pickup or dropoff zone_id
  std::vector<TripRecord> kept;    // accepted trips, for travel-time proxies
};

inline std::vector<TripRecord> read_trips(std::istream& in) {
  CsvReader csv(in);
  std::vector<TripRecord> trips;
  if (csv.empty_header()) return trips;
  const auto c_pu = csv.require("pickup_datetime");
  const auto c_do = csv.require("dropoff_datetime");
  const auto c_puz = csv.require("pu_zone");
  const auto c_doz = csv.require("do_zone");
  const auto c_min = csv.require("trip_minutes");
  const auto c_km = csv.require("trip_km");
  std::vector<std::string> f;
  while (csv.next(f)) {
    TripRecord t;
    t.pickup_s = parse_timestamp_seconds(f[c_pu]);
    t.dropoff_s = parse_timestamp_seconds(f[c_do]);
    t.pu_zone = static_cast<int>(parse_int(f[c_puz], "pu_zone"));
    t.do_zone = static_cast<int>(parse_int(f[c_doz], "do_zone"));
    t.minutes = parse_double(f[c_min], "trip_minutes");
    t.km = parse_double(f[c_km], "trip_km");
    trips.push_back(t);
  }
  return trips;
}

inline void write_trips(std::ostream& out, std::span<const TripRecord> trips) {
  out << "pickup_datetime,dropoff_datetime,pu_zone,do_zone,trip_minutes,trip_km\n";
  auto stamp = [](std::int64_t s) {
    const HourStamp h = floor_div(s, 3600);
    std::string base = format_hour(h);
    const auto rem = s - h * 3600;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(rem / 60),
                  static_cast<int>(rem % 60));
    return base.substr(0, 14) + buf;
  };
  for (const auto& t : trips)
    out << stamp(t.pickup_s) << ',' << stamp(t.dropoff_s) << ',' << t.pu_zone << ','
        << t.do_zone << ',' << fmt_num(t.minutes, 3) << ',' << fmt_num(t.km, 3) << '\n';
}

// Groups accepted trips into hourly OD counts keyed by pickup hour.
inline IngestResult aggregate_trips(std::span<const TripRecord> trips, const ZoneTable& zones,
                                    const TripFilter& filter = {}) {
  filter.validate();
  IngestResult res;
  std::map<std::tuple<ZoneIndex, ZoneIndex, HourStamp>, std::int64_t> cells;
  for (const auto& t : trips) {
    ++res.read;
    if (!filter.accepts(t)) {
      ++res.filtered;
      continue;
    }
    const auto o = zones.index_of(t.pu_zone);
    const auto d = zones.index_of(t.do_zone);
    if (!o || !d) {
      ++res.rejected_zone;
      continue;
    }
    ++res.accepted;
    ++cells[{*o, *d, floor_div(t.pickup_s, 3600)}];
    res.kept.push_back(t);
  }
  std::vector<FlowRow> rows;
  rows.reserve(cells.size());
  for (const auto& [key, n] : cells)
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  res.flows = FlowTable(std::move(rows));
  return res;
}

inline IngestResult ingest_trips(std::istream& trips_csv, const ZoneTable& zones,
                                 const TripFilter& filter = {}) {
  const auto trips = read_trips(trips_csv);
  return aggregate_trips(trips, zones, filter);
}

}  // namespace ambit::od
