#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/time.hpp"
#include "ambit/util/error.hpp"

namespace ambit::glm {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct GlmDesign {
  std::vector<std::string> columns;
  SparseMatrix X;
  std::vector<double> row_weights;  // empty means unit weights
  std::vector<bool> penalized;      // columns subject to ridge
  bool sparse = false;
  std::size_t unseen_levels = 0;    // FE lookups that fell back to the reference

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
};

inline GlmDesign dense_design(const std::vector<std::string>& columns,
                              const Eigen::MatrixXd& values) {
  if (static_cast<std::size_t>(values.cols()) != columns.size())
    throw Error("design column count mismatch");
  GlmDesign d;
  d.columns = columns;
  d.X = values.sparseView(0.0, 0.0);
  d.X.makeCompressed();
  d.penalized.assign(columns.size(), false);
  return d;
}

// Intercept, log m_o, log m_d, log d.
inline GlmDesign gravity_design(std::span<const od::FlowRow> rows, const od::MassVector& m_o,
                                const od::MassVector& m_d, const od::ImpedanceMatrix& imp) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double mo = m_o[r.origin], md = m_d[r.dest];
    if (!(mo > 0) || !(md > 0)) throw Error("gravity design needs positive masses");
    const auto k = static_cast<Eigen::Index>(i);
    X(k, 0) = 1.0;
    X(k, 1) = std::log(mo);
    X(k, 2) = std::log(md);
    X(k, 3) = std::log(imp(r.origin, r.dest));
  }
  return dense_design({"intercept", "log_m_o", "log_m_d", "log_d"}, X);
}

inline std::vector<double> response(std::span<const od::FlowRow> rows) {
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = static_cast<double>(rows[i].flow);
  return y;
}

struct FeConfig {
  bool origin = true;
  bool destination = true;
  bool hour_of_week = true;
  bool origin_x_hour = true;       // origin x hour-of-day
  bool destination_x_hour = true;  // destination x hour-of-day
};

enum class FeGroup { origin, destination, hour_of_week, origin_x_hour, destination_x_hour };
inline constexpr std::array<FeGroup, 5> kFeGroups{FeGroup::origin, FeGroup::destination,
                                                  FeGroup::hour_of_week, FeGroup::origin_x_hour,
                                                  FeGroup::destination_x_hour};

inline const char* to_string(FeGroup g) {
  switch (g) {
    case FeGroup::origin: return "origin";
    case FeGroup::destination: return "destination";
    case FeGroup::hour_of_week: return "hour_of_week";
    case FeGroup::origin_x_hour: return "origin_x_hour";
    case FeGroup::destination_x_hour: return "destination_x_hour";
  }
  return "?";
}

inline long fe_level(FeGroup g, const od::FlowRow& r) {
  switch (g) {
    case FeGroup::origin: return r.origin;
    case FeGroup::destination: return r.dest;
    case FeGroup::hour_of_week: return od::temporal_features(r.hour).hour_of_week;
    case FeGroup::origin_x_hour: return static_cast<long>(r.origin) * 24 + od::hour_of_day(r.hour);
    case FeGroup::destination_x_hour: return static_cast<long>(r.dest) * 24 + od::hour_of_day(r.hour);
  }
  return 0;
}

inline bool enabled(const FeConfig& c, FeGroup g) {
  switch (g) {
    case FeGroup::origin: return c.origin;
    case FeGroup::destination: return c.destination;
    case FeGroup::hour_of_week: return c.hour_of_week;
    case FeGroup::origin_x_hour: return c.origin_x_hour;
    case FeGroup::destination_x_hour: return c.destination_x_hour;
  }
  return false;
}

// One-hot encoder over levels observed at fit time. The smallest level of
// each group is the dropped reference; continuous part is intercept + log d.
class FeEncoder {
 public:
  FeEncoder() = default;

  FeEncoder(std::span<const od::FlowRow> rows, const FeConfig& cfg) : cfg_(cfg) {
    columns_ = {"intercept", "log_d"};
    for (auto g : kFeGroups) {
      auto& lv = levels_[static_cast<std::size_t>(g)];
      if (!enabled(cfg, g)) continue;
      std::vector<long> seen;
      seen.reserve(rows.size());
      for (const auto& r : rows) seen.push_back(fe_level(g, r));
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (std::size_t k = 0; k < seen.size(); ++k) {
        if (k == 0) {
          reference_[static_cast<std::size_t>(g)] = seen[0];
          continue;
        }
        lv[seen[k]] = columns_.size();
        columns_.push_back(std::string(to_string(g)) + "=" + std::to_string(seen[k]));
      }
      level_counts_[static_cast<std::size_t>(g)] = seen.size();
    }
  }

  GlmDesign encode(std::span<const od::FlowRow> rows, const od::ImpedanceMatrix& imp) const {
    GlmDesign d;
    d.columns = columns_;
    d.sparse = true;
    d.penalized.assign(columns_.size(), true);
    d.penalized[0] = false;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(rows.size() * 7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const auto row = static_cast<int>(i);
      trip.emplace_back(row, 0, 1.0);
      trip.emplace_back(row, 1, std::log(imp(r.origin, r.dest)));
      for (auto g : kFeGroups) {
        if (!enabled(cfg_, g)) continue;
        const auto gi = static_cast<std::size_t>(g);
        const long level = fe_level(g, r);
        auto it = levels_[gi].find(level);
        if (it != levels_[gi].end())
          trip.emplace_back(row, static_cast<int>(it->second), 1.0);
        else if (level != reference_[gi])
          ++d.unseen_levels;
      }
    }
    d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns_.size()));
    d.X.setFromTriplets(trip.begin(), trip.end());
    d.X.makeCompressed();
    return d;
  }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t level_count(FeGroup g) const { return level_counts_[static_cast<std::size_t>(g)]; }
  std::size_t categories() const {
    std::size_t total = 0;
    for (auto c : level_counts_) total += c;
    return total;
  }
  const FeConfig& config() const { return cfg_; }

 private:
  FeConfig cfg_;
  std::vector<std::string> columns_;
  std::array<std::map<long, std::size_t>, 5> levels_;
  std::array<long, 5> reference_{-1, -1, -1, -1, -1};
  std::array<std::size_t, 5> level_counts_{};
};

}  // namespace ambit::glm
