#pragma once

#include <span>
#include <string>
#include <vector>

#include "ambit/gbt/booster.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/feature_matrix.hpp"

namespace ambit::attribution {

// Contributions in link space: base_value + sum(contributions) == prediction.
struct AttributionRow {
  std::vector<double> contributions;
  double base_value = 0.0;
  double prediction = 0.0;
};

struct Attributions {
  std::vector<std::string> feature_names;
  FeatureMatrix values;  // the explained rows, aligned to feature_names
  std::vector<AttributionRow> rows;
};

namespace detail {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0;
  double one_fraction = 0;
  double pweight = 0;
};

inline void extend_path(std::vector<PathElement>& path, int depth, double zero, double one,
                        int feature) {
  path[static_cast<std::size_t>(depth)] = {feature, zero, one, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    path[k + 1].pweight += one * path[k].pweight * (i + 1) / (depth + 1);
    path[k].pweight = zero * path[k].pweight * (depth - i) / (depth + 1);
  }
}

inline void unwind_path(std::vector<PathElement>& path, int depth, int index) {
  const double one = path[static_cast<std::size_t>(index)].one_fraction;
  const double zero = path[static_cast<std::size_t>(index)].zero_fraction;
  double next = path[static_cast<std::size_t>(depth)].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    auto& el = path[static_cast<std::size_t>(i)];
    if (one != 0) {
      const double tmp = el.pweight;
      el.pweight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - el.pweight * zero * (depth - i) / (depth + 1);
    } else {
      el.pweight = el.pweight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    auto& el = path[static_cast<std::size_t>(i)];
    const auto& nx = path[static_cast<std::size_t>(i + 1)];
    el.feature = nx.feature;
    el.zero_fraction = nx.zero_fraction;
    el.one_fraction = nx.one_fraction;
  }
}

inline double unwound_path_sum(const std::vector<PathElement>& path, int depth, int index) {
  const double one = path[static_cast<std::size_t>(index)].one_fraction;
  const double zero = path[static_cast<std::size_t>(index)].zero_fraction;
  double next = path[static_cast<std::size_t>(depth)].pweight;
  double total = 0;
  for (int i = depth - 1; i >= 0; --i) {
    const auto& el = path[static_cast<std::size_t>(i)];
    if (one != 0) {
      const double tmp = next * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next = el.pweight - tmp * zero * (depth - i) / (depth + 1);
    } else if (zero != 0) {
      total += (el.pweight / zero) / (static_cast<double>(depth - i) / (depth + 1));
    }
  }
  return total;
}

inline void recurse(const gbt::Tree& t, int node, std::span<const double> x,
                    std::vector<double>& phi, std::vector<PathElement> path, int depth,
                    double parent_zero, double parent_one, int parent_feature) {
  path.resize(static_cast<std::size_t>(depth) + 1);
  extend_path(path, depth, parent_zero, parent_one, parent_feature);
  const auto& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    for (int i = 1; i <= depth; ++i) {
      const double w = unwound_path_sum(path, depth, i);
      const auto& el = path[static_cast<std::size_t>(i)];
      phi[static_cast<std::size_t>(el.feature)] += w * (el.one_fraction - el.zero_fraction) * n.value;
    }
    return;
  }
  const bool go_left = x[static_cast<std::size_t>(n.feature)] <= n.threshold;
  const int hot = go_left ? n.left : n.right;
  const int cold = go_left ? n.right : n.left;
  const double cover = t.nodes[static_cast<std::size_t>(n.left)].cover +
                       t.nodes[static_cast<std::size_t>(n.right)].cover;
  const double hot_zero = t.nodes[static_cast<std::size_t>(hot)].cover / cover;
  const double cold_zero = t.nodes[static_cast<std::size_t>(cold)].cover / cover;
  double incoming_zero = 1.0, incoming_one = 1.0;
  int k = 0;
  while (k <= depth && path[static_cast<std::size_t>(k)].feature != n.feature) ++k;
  if (k != depth + 1) {
    incoming_zero = path[static_cast<std::size_t>(k)].zero_fraction;
    incoming_one = path[static_cast<std::size_t>(k)].one_fraction;
    unwind_path(path, depth, k);
    --depth;
  }
  recurse(t, hot, x, phi, path, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature);
  recurse(t, cold, x, phi, path, depth + 1, cold_zero * incoming_zero, 0.0, n.feature);
}

}  // namespace detail

// Cover-weighted mean leaf value of a tree.
inline double expected_value(const gbt::Tree& t, int node = 0) {
  const auto& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return n.value;
  const double cl = t.nodes[static_cast<std::size_t>(n.left)].cover;
  const double cr = t.nodes[static_cast<std::size_t>(n.right)].cover;
  return (cl * expected_value(t, n.left) + cr * expected_value(t, n.right)) / (cl + cr);
}

inline double base_value(const gbt::Ensemble& ens) {
  double b = ens.base_score;
  for (const auto& t : ens.active_trees()) b += expected_value(t);
  return b;
}

// Path-dependent TreeSHAP for one row already aligned to ens.feature_names.
inline AttributionRow shap_row(const gbt::Ensemble& ens, std::span<const double> x,
                               double base) {
  if (x.size() != ens.feature_names.size()) throw Error("row width does not match the ensemble features");
  AttributionRow row;
  row.contributions.assign(x.size(), 0.0);
  row.base_value = base;
  for (const auto& t : ens.active_trees()) {
    if (t.nodes[0].is_leaf()) continue;
    detail::recurse(t, 0, x, row.contributions, {}, 0, 1.0, 1.0, -1);
  }
  row.prediction = ens.predict_link(x);
  return row;
}

inline Attributions shap_values(const gbt::Ensemble& ens, const FeatureMatrix& X) {
  Attributions out;
  out.feature_names = ens.feature_names;
  out.values = X.names == ens.feature_names ? X : X.select(ens.feature_names);
  const double base = base_value(ens);
  out.rows.reserve(X.rows);
  for (std::size_t r = 0; r < out.values.rows; ++r)
    out.rows.push_back(shap_row(ens, out.values.row(r), base));
  return out;
}

}  // namespace ambit::attribution
