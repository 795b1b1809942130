#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "ambit/util/error.hpp"

namespace ambit::od {

// Hours since 1970-01-01T00:00 UTC; every timestamp in a FlowTable is
// truncated to the hour.
using HourStamp = std::int64_t;

struct TemporalFeatures {
  int hour_of_day;   // [0, 24)
  int day_of_week;   // [0, 7), Monday = 0
  int month;         // [1, 12]
  int is_weekend;    // {0, 1}
  int hour_of_week;  // [0, 168) = 24 * day_of_week + hour_of_day
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline TemporalFeatures temporal_features(HourStamp h) {
  using namespace std::chrono;
  const std::int64_t day = floor_div(h, 24);
  const sys_days d{days{day}};
  const year_month_day ymd{d};
  const weekday wd{d};
  TemporalFeatures f{};
  f.hour_of_day = static_cast<int>(h - day * 24);
  f.day_of_week = static_cast<int>(wd.iso_encoding()) - 1;
  f.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  f.is_weekend = f.day_of_week >= 5 ? 1 : 0;
  f.hour_of_week = 24 * f.day_of_week + f.hour_of_day;
  return f;
}

inline int hour_of_day(HourStamp h) { return static_cast<int>(h - floor_div(h, 24) * 24); }

inline HourStamp make_hour(int year, unsigned month, unsigned day, int hour = 0) {
  using namespace std::chrono;
  const sys_days d = std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
  return static_cast<HourStamp>(d.time_since_epoch().count()) * 24 + hour;
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS[.fff]]" and the 'T'/'Z'
// ISO-8601 variants. Returns seconds since the epoch (UTC).
inline std::int64_t parse_timestamp_seconds(std::string_view s) {
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0;
  double ss = 0;
  std::string buf(s);
  for (char& c : buf)
    if (c == 'T') c = ' ';
  const int n = std::sscanf(buf.c_str(), "%d-%d-%d %d:%d:%lf", &y, &mo, &d, &hh, &mm, &ss);
  if (n != 3 && n < 5) throw IngestError("malformed timestamp '" + std::string(s) + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 ||
      ss >= 61)
    throw IngestError("timestamp out of range '" + std::string(s) + "'");
  const HourStamp h = make_hour(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), hh);
  return h * 3600 + mm * 60 + static_cast<std::int64_t>(ss);
}

inline HourStamp parse_hour(std::string_view s) {
  return floor_div(parse_timestamp_seconds(s), 3600);
}

inline std::string format_hour(HourStamp h) {
  using namespace std::chrono;
  const std::int64_t day = floor_div(h, 24);
  const year_month_day ymd{sys_days{days{day}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h - day * 24));
  return buf;
}

}  // namespace ambit::od
