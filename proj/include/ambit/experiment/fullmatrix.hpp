#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ambit/eval/metrics.hpp"
#include "ambit/od/time.hpp"
#include "ambit/residual/models.hpp"
#include "ambit/residual/task.hpp"
#include "ambit/util/error.hpp"

namespace ambit::experiment {

inline constexpr const char* kFullMatrixNote = "not directly comparable to the truncated main task";

// Test-window flows averaged into hour-of-week cells over every OD pair of
// the zone universe. Slots without a test hour are skipped; the diagonal is
// kept only when intrazonal flows occur in the data.
struct FullMatrixFrame {
  std::vector<od::FlowRow> cells;  // hour = first test hour with that hour of week
  std::vector<double> y;           // mean flow over that slot's test hours
  std::size_t slots = 0;
  bool diagonal = false;
};

inline FullMatrixFrame full_matrix_frame(const residual::Task& t) {
  const std::size_t n = t.n_zones();
  std::array<od::HourStamp, 168> rep{};
  std::array<int, 168> hours{};
  for (od::HourStamp h = t.val_end; h < t.test_end; ++h) {
    const int how = od::temporal_features(h).hour_of_week;
    if (hours[how]++ == 0) rep[how] = h;
  }
  FullMatrixFrame f;
  for (const auto& r : t.full)
    if (r.origin == r.dest && r.flow > 0) f.diagonal = true;
  std::vector<double> sum(168 * n * n, 0.0);
  for (const auto& r : t.full) {
    if (r.hour < t.val_end || r.hour >= t.test_end) continue;
    const int how = od::temporal_features(r.hour).hour_of_week;
    sum[(static_cast<std::size_t>(how) * n + r.origin) * n + r.dest] += static_cast<double>(r.flow);
  }
  for (int how = 0; how < 168; ++how) {
    if (!hours[how]) continue;
    ++f.slots;
    for (std::size_t o = 0; o < n; ++o)
      for (std::size_t d = 0; d < n; ++d) {
        if (o == d && !f.diagonal) continue;
        f.cells.push_back({static_cast<od::ZoneIndex>(o), static_cast<od::ZoneIndex>(d), rep[how], 0});
        f.y.push_back(sum[(static_cast<std::size_t>(how) * n + o) * n + d] / hours[how]);
      }
  }
  if (f.cells.empty()) throw EmptyTaskError("full-matrix evaluation: empty test window");
  return f;
}

inline const std::vector<std::string>& fullmatrix_kinds() {
  static const std::vector<std::string> k{"dc_hourly", "oc_power", "oc_power_poi", "oc_exp",
                                          "oc_exp_poi", "dest_power", "cd", "cd_poi",
                                          "ops_flow", "io_flow", "ops_poi", "io_poi"};
  return k;
}

inline eval::Metrics evaluate_full_matrix(const residual::Model& m, const residual::Task& t,
                                          const FullMatrixFrame& f) {
  return eval::compute_metrics(f.y, m.predict(t, f.cells));
}

}  // namespace ambit::experiment
