#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/util/error.hpp"

namespace ambit::spatial {

using GridPoint = std::map<std::string, double>;

inline std::vector<GridPoint> cartesian_grid(const std::map<std::string, std::vector<double>>& axes) {
  std::vector<GridPoint> out{GridPoint{}};
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ConfigError("empty grid axis '" + name + "'");
    std::vector<GridPoint> next;
    for (const auto& p : out)
      for (double v : values) {
        GridPoint q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  return out;
}

struct TuningEntry {
  GridPoint point;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  bool chosen = false;
};

struct TuningResult {
  std::string family;
  std::string objective_name = "mae";
  GridPoint best;
  double best_objective = 0.0;
  std::vector<TuningEntry> trace;
};

namespace detail {

inline double axis_or(const GridPoint& p, const char* name) {
  auto it = p.find(name);
  return it == p.end() ? 0.0 : it->second;
}

}  // namespace detail

// Exhaustive search; lowest objective wins, ties go to smaller beta, then
// smaller rho, then grid order. Candidates that throw are recorded and skipped.
inline TuningResult tune_grid(const std::string& family, const std::vector<GridPoint>& grid,
                              const std::function<double(const GridPoint&)>& evaluate,
                              const std::string& objective_name = "mae") {
  if (grid.empty()) throw ConfigError("tuning grid for " + family + " is empty");
  TuningResult res;
  res.family = family;
  res.objective_name = objective_name;
  std::ptrdiff_t best = -1;
  for (const auto& p : grid) {
    TuningEntry e;
    e.point = p;
    try {
      e.objective = evaluate(p);
      if (!std::isfinite(e.objective)) e.error = "non-finite objective";
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    res.trace.push_back(std::move(e));
    const auto idx = static_cast<std::ptrdiff_t>(res.trace.size() - 1);
    const auto& cur = res.trace.back();
    if (!cur.error.empty()) continue;
    if (best < 0) {
      best = idx;
      continue;
    }
    const auto& b = res.trace[static_cast<std::size_t>(best)];
    const auto key = [](const TuningEntry& t) {
      return std::tuple(t.objective, detail::axis_or(t.point, "beta"), detail::axis_or(t.point, "rho"));
    };
    if (key(cur) < key(b)) best = idx;
  }
  if (best < 0) {
    std::string msg = "all " + std::to_string(grid.size()) + " candidates failed for " + family;
    for (const auto& e : res.trace) {
      msg += "\n  ";
      for (const auto& [k, v] : e.point) msg += k + "=" + std::to_string(v) + " ";
      msg += ": " + e.error;
    }
    throw FitError(msg);
  }
  res.trace[static_cast<std::size_t>(best)].chosen = true;
  res.best = res.trace[static_cast<std::size_t>(best)].point;
  res.best_objective = res.trace[static_cast<std::size_t>(best)].objective;
  return res;
}

inline nlohmann::json to_json(const TuningResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace) {
    nlohmann::json row{{"model_family", r.family}, {"grid_point", e.point}, {"chosen", e.chosen}};
    if (e.error.empty())
      row["validation"] = {{r.objective_name, e.objective}};
    else
      row["error"] = e.error;
    trace.push_back(std::move(row));
  }
  return {{"model_family", r.family}, {"objective", r.objective_name},
          {"best", r.best}, {"best_objective", r.best_objective}, {"trace", trace}};
}

}  // namespace ambit::spatial
