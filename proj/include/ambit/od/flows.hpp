#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <tuple>
#include <vector>

#include "ambit/od/time.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/csv.hpp"
#include "ambit/util/error.hpp"

namespace ambit::od {

struct FlowRow {
  ZoneIndex origin = 0;
  ZoneIndex dest = 0;
  HourStamp hour = 0;
  std::int64_t flow = 0;

  friend bool operator==(const FlowRow&, const FlowRow&) = default;
};

inline bool key_less(const FlowRow& a, const FlowRow& b) {
  return std::tie(a.origin, a.dest, a.hour) < std::tie(b.origin, b.dest, b.hour);
}

// Sparse hourly OD observations in canonical (origin, dest, hour) order.
class FlowTable {
 public:
  FlowTable() = default;

  explicit FlowTable(std::vector<FlowRow> rows) : rows_(std::move(rows)) {
    if (!std::is_sorted(rows_.begin(), rows_.end(), key_less))
      std::sort(rows_.begin(), rows_.end(), key_less);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].flow < 0) throw Error("negative flow in FlowTable");
      if (i > 0 && !key_less(rows_[i - 1], rows_[i]))
        throw Error("duplicate (origin, dest, hour) row in FlowTable");
    }
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const FlowRow& operator[](std::size_t i) const { return rows_[i]; }
  std::span<const FlowRow> rows() const { return rows_; }
  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

  std::int64_t total_flow() const {
    std::int64_t t = 0;
    for (const auto& r : rows_) t += r.flow;
    return t;
  }

  HourStamp min_hour() const {
    HourStamp h = rows_.empty() ? 0 : rows_.front().hour;
    for (const auto& r : rows_) h = std::min(h, r.hour);
    return h;
  }

  HourStamp max_hour() const {
    HourStamp h = rows_.empty() ? 0 : rows_.front().hour;
    for (const auto& r : rows_) h = std::max(h, r.hour);
    return h;
  }

 private:
  std::vector<FlowRow> rows_;
};

inline std::vector<FlowRow> gather(const FlowTable& t, std::span<const std::size_t> idx) {
  std::vector<FlowRow> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(t[i]);
  return out;
}

inline void write_flows(std::ostream& out, const FlowTable& flows, const ZoneTable& zones) {
  out << "origin,dest,hour,flow\n";
  for (const auto& r : flows)
    out << zones[r.origin].id << ',' << zones[r.dest].id << ',' << format_hour(r.hour) << ','
        << r.flow << '\n';
}

inline FlowTable read_flows(std::istream& in, const ZoneTable& zones) {
  CsvReader csv(in);
  if (csv.empty_header()) return {};
  const auto c_o = csv.require("origin");
  const auto c_d = csv.require("dest");
  const auto c_h = csv.require("hour");
  const auto c_f = csv.require("flow");
  std::vector<FlowRow> rows;
  std::vector<std::string> f;
  while (csv.next(f)) {
    const auto o = zones.index_of(static_cast<int>(parse_int(f[c_o], "origin")));
    const auto d = zones.index_of(static_cast<int>(parse_int(f[c_d], "dest")));
    if (!o || !d) throw IngestError("flows file references an unknown zone at line " +
                                    std::to_string(csv.line_number()));
    rows.push_back({*o, *d, parse_hour(f[c_h]), parse_int(f[c_f], "flow")});
  }
  return FlowTable(std::move(rows));
}

}  // namespace ambit::od
