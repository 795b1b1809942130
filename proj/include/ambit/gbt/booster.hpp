#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/gbt/objective.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/feature_matrix.hpp"
#include "ambit/util/random.hpp"

namespace ambit::gbt {

struct BoostConfig {
  int n_estimators = 500;
  int max_depth = 8;
  double learning_rate = 0.05;
  double subsample = 1.0;
  double colsample = 1.0;
  int early_stopping_rounds = 50;
  Objective objective = Objective::squared;
  double tweedie_power = 1.5;
  std::map<std::string, int> monotone;  // feature name -> {-1, 0, +1}
  std::uint64_t seed = 42;
  double min_child_weight = 1.0;
  double lambda = 1.0;
  int max_bins = 256;
  double min_split_gain = 1e-10;
  std::optional<double> base_score;  // link space; unset means the target mean

  void validate() const {
    if (n_estimators < 0) throw ConfigError("n_estimators must be >= 0");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (!(learning_rate > 0 && learning_rate <= 1)) throw ConfigError("learning_rate must be in (0, 1]");
    if (!(subsample > 0 && subsample <= 1)) throw ConfigError("subsample must be in (0, 1]");
    if (!(colsample > 0 && colsample <= 1)) throw ConfigError("colsample must be in (0, 1]");
    if (objective == Objective::tweedie && !(tweedie_power > 1 && tweedie_power < 2))
      throw ConfigError("tweedie power must be in (1, 2)");
    if (lambda < 0 || min_child_weight < 0) throw ConfigError("lambda and min_child_weight must be >= 0");
    if (max_bins < 2 || max_bins > 256) throw ConfigError("max_bins must be in [2, 256]");
    for (const auto& [name, s] : monotone)
      if (s < -1 || s > 1) throw ConfigError("monotone sign for '" + name + "' must be -1, 0 or +1");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output (already scaled by the learning rate)
  double cover = 0.0;  // hessian sum routed here
  double lower = -std::numeric_limits<double>::infinity();  // monotone bounds on the raw weight
  double upper = std::numeric_limits<double>::infinity();

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const {
    int k = 0;
    while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }
};

struct Ensemble {
  BoostConfig config;
  std::vector<std::string> feature_names;
  double base_score = 0.0;  // link space
  std::vector<Tree> trees;
  int best_iteration = 0;  // number of leading trees used for prediction
  std::vector<double> train_loss;  // after each round
  std::vector<double> valid_loss;  // index 0 is the base score alone

  std::span<const Tree> active_trees() const {
    return {trees.data(), static_cast<std::size_t>(std::min<int>(best_iteration, static_cast<int>(trees.size())))};
  }

  double predict_link(std::span<const double> x) const {
    double f = base_score;
    for (const auto& t : active_trees()) f += t.predict(x);
    return f;
  }

  double predict_row(std::span<const double> x) const {
    return inverse_link(config.objective, predict_link(x));
  }

  // Columns are matched by name; extra columns are ignored.
  std::vector<double> predict(const FeatureMatrix& X) const {
    const FeatureMatrix aligned = X.names == feature_names ? X : X.select(feature_names);
    std::vector<double> out(aligned.rows);
    for (std::size_t r = 0; r < aligned.rows; ++r) out[r] = predict_row(aligned.row(r));
    return out;
  }

  std::vector<double> predict_link(const FeatureMatrix& X) const {
    const FeatureMatrix aligned = X.names == feature_names ? X : X.select(feature_names);
    std::vector<double> out(aligned.rows);
    for (std::size_t r = 0; r < aligned.rows; ++r) out[r] = predict_link(aligned.row(r));
    return out;
  }

  int monotone_sign(const std::string& feature) const {
    auto it = config.monotone.find(feature);
    return it == config.monotone.end() ? 0 : it->second;
  }
};

namespace detail {

// Upper bin edges per feature; value x falls in the first bin whose edge is >= x.
struct BinnedMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<double>> cuts;
  std::vector<std::size_t> offset;  // histogram offset per feature
  std::vector<std::uint8_t> bins;   // row-major
  std::size_t total_bins = 0;

  std::uint8_t bin(std::size_t r, std::size_t f) const { return bins[r * cols + f]; }
};

inline std::vector<double> quantile_cuts(std::vector<double> v, int max_bins) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() <= static_cast<std::size_t>(max_bins)) return v;
  std::vector<double> cuts;
  const double n = static_cast<double>(v.size() - 1);
  for (int b = 1; b < max_bins; ++b) {
    const double pos = n * b / max_bins;
    const double c = v[static_cast<std::size_t>(std::floor(pos))];
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  if (cuts.back() < v.back()) cuts.push_back(v.back());
  return cuts;
}

inline BinnedMatrix bin_features(const FeatureMatrix& X, int max_bins) {
  BinnedMatrix B;
  B.rows = X.rows;
  B.cols = X.cols();
  B.cuts.resize(B.cols);
  B.offset.resize(B.cols);
  for (std::size_t f = 0; f < B.cols; ++f) {
    auto col = X.column(f);
    for (double v : col)
      if (!std::isfinite(v)) throw Error("feature '" + X.names[f] + "' has non-finite values");
    B.cuts[f] = quantile_cuts(std::move(col), max_bins);
    B.offset[f] = B.total_bins;
    B.total_bins += B.cuts[f].size();
  }
  B.bins.resize(B.rows * B.cols);
  for (std::size_t r = 0; r < B.rows; ++r)
    for (std::size_t f = 0; f < B.cols; ++f) {
      const auto& c = B.cuts[f];
      const auto it = std::lower_bound(c.begin(), c.end(), X.at(r, f));
      B.bins[r * B.cols + f] = static_cast<std::uint8_t>(std::min<std::ptrdiff_t>(it - c.begin(), static_cast<std::ptrdiff_t>(c.size()) - 1));
    }
  return B;
}

struct GH {
  double g = 0, h = 0;
};

inline double leaf_weight(double G, double H, double lambda, double lo, double hi) {
  const double w = H + lambda > 0 ? -G / (H + lambda) : 0.0;
  return std::clamp(w, lo, hi);
}

// Objective value of a node holding weight w (lower is better).
inline double node_objective(double G, double H, double lambda, double w) {
  return G * w + 0.5 * (H + lambda) * w * w;
}

struct SplitChoice {
  double gain = 0;
  int feature = -1;
  int bin = -1;
  double wl = 0, wr = 0;
  double hl = 0, hr = 0;
};

struct GrowNode {
  int index;  // in tree.nodes
  std::vector<std::uint32_t> rows;
  std::vector<GH> hist;
  double G = 0, H = 0;
  int depth = 0;
};

}  // namespace detail

class Trainer {
 public:
  Trainer(const FeatureMatrix& X, std::span<const double> y, const FeatureMatrix* Xv,
          std::span<const double> yv, const BoostConfig& cfg)
      : X_(X), y_(y), Xv_(Xv), yv_(yv), cfg_(cfg) {}

  Ensemble run() {
    cfg_.validate();
    if (X_.cols() == 0) throw Error("boosting needs at least one feature");
    if (X_.rows == 0) throw EmptyTaskError("boosting needs at least one training row");
    if (y_.size() != X_.rows) throw Error("target length does not match feature rows");
    for (double v : y_) {
      if (!std::isfinite(v)) throw Error("targets must be finite");
      if (uses_log_link(cfg_.objective) && v < 0)
        throw Error(std::string(to_string(cfg_.objective)) + " objective needs non-negative targets");
    }
    for (const auto& [name, s] : cfg_.monotone) (void)X_.column_index(name);

    Ensemble ens;
    ens.config = cfg_;
    ens.feature_names = X_.names;
    sign_.assign(X_.cols(), 0);
    for (std::size_t f = 0; f < X_.cols(); ++f) sign_[f] = ens.monotone_sign(X_.names[f]);
    B_ = detail::bin_features(X_, cfg_.max_bins);

    const double ybar = std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
    ens.base_score = cfg_.base_score
                         ? *cfg_.base_score
                         : uses_log_link(cfg_.objective) ? std::log(std::max(ybar, 1e-12)) : ybar;

    FeatureMatrix Xv_aligned;
    const bool has_val = Xv_ && Xv_->rows > 0;
    if (has_val) {
      if (yv_.size() != Xv_->rows) throw Error("validation target length mismatch");
      Xv_aligned = Xv_->names == X_.names ? *Xv_ : Xv_->select(X_.names);
    }
    std::vector<double> F(X_.rows, ens.base_score), Fv(has_val ? Xv_aligned.rows : 0, ens.base_score);
    const double p = cfg_.tweedie_power;
    double best = has_val ? mean_loss(cfg_.objective, yv_, Fv, p) : 0.0;
    if (has_val) ens.valid_loss.push_back(best);
    int best_iter = 0;

    std::vector<detail::GH> gh(X_.rows);
    for (int round = 0; round < cfg_.n_estimators; ++round) {
      for (std::size_t i = 0; i < X_.rows; ++i) {
        const auto d = grad_hess(cfg_.objective, y_[i], F[i], p);
        gh[i] = {d.g, d.h};
      }
      Rng rng(derive_seed(cfg_.seed, 1000 + static_cast<std::uint64_t>(round)));
      std::vector<std::uint32_t> rows;
      if (cfg_.subsample < 1.0) {
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cfg_.subsample * static_cast<double>(X_.rows))));
        for (auto r : sample_without_replacement(X_.rows, k, rng)) rows.push_back(static_cast<std::uint32_t>(r));
      } else {
        rows.resize(X_.rows);
        std::iota(rows.begin(), rows.end(), 0u);
      }
      std::vector<std::size_t> feats;
      if (cfg_.colsample < 1.0) {
        const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg_.colsample * static_cast<double>(X_.cols()))));
        feats = sample_without_replacement(X_.cols(), k, rng);
      } else {
        feats.resize(X_.cols());
        std::iota(feats.begin(), feats.end(), std::size_t{0});
      }

      Tree tree = grow(std::move(rows), gh, feats);
      for (std::size_t i = 0; i < X_.rows; ++i) F[i] += route_binned(tree, i);
      ens.trees.push_back(std::move(tree));
      const double tl = mean_loss(cfg_.objective, y_, F, p);
      if (!std::isfinite(tl)) throw FitError("non-finite training loss at round " + std::to_string(round));
      ens.train_loss.push_back(tl);

      if (!has_val) {
        best_iter = round + 1;
        continue;
      }
      for (std::size_t i = 0; i < Xv_aligned.rows; ++i) Fv[i] += ens.trees.back().predict(Xv_aligned.row(i));
      const double vl = mean_loss(cfg_.objective, yv_, Fv, p);
      if (!std::isfinite(vl)) throw FitError("non-finite validation loss at round " + std::to_string(round));
      ens.valid_loss.push_back(vl);
      if (vl < best) {
        best = vl;
        best_iter = round + 1;
      } else if (round + 1 - best_iter >= cfg_.early_stopping_rounds) {
        break;
      }
    }
    ens.best_iteration = best_iter;
    return ens;
  }

 private:
  double route_binned(const Tree& t, std::size_t r) const {
    int k = 0;
    while (!t.nodes[static_cast<std::size_t>(k)].is_leaf()) {
      const auto& n = t.nodes[static_cast<std::size_t>(k)];
      k = B_.bin(r, static_cast<std::size_t>(n.feature)) <= split_bin_[static_cast<std::size_t>(k)] ? n.left : n.right;
    }
    return t.nodes[static_cast<std::size_t>(k)].value;
  }

  void build_hist(detail::GrowNode& node, const std::vector<detail::GH>& gh,
                  const std::vector<std::size_t>& feats) const {
    node.hist.assign(B_.total_bins, {});
    node.G = node.H = 0;
    for (auto r : node.rows) {
      const auto& d = gh[r];
      node.G += d.g;
      node.H += d.h;
      const std::uint8_t* b = &B_.bins[static_cast<std::size_t>(r) * B_.cols];
      for (auto f : feats) {
        auto& cell = node.hist[B_.offset[f] + b[f]];
        cell.g += d.g;
        cell.h += d.h;
      }
    }
  }

  detail::SplitChoice best_split(const detail::GrowNode& node, const TreeNode& tn,
                                 const std::vector<std::size_t>& feats) const {
    detail::SplitChoice best;
    const double lam = cfg_.lambda;
    const double w_parent = detail::leaf_weight(node.G, node.H, lam, tn.lower, tn.upper);
    const double parent_obj = detail::node_objective(node.G, node.H, lam, w_parent);
    for (auto f : feats) {
      const std::size_t nb = B_.cuts[f].size();
      double gl = 0, hl = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        gl += node.hist[B_.offset[f] + b].g;
        hl += node.hist[B_.offset[f] + b].h;
        const double gr = node.G - gl, hr = node.H - hl;
        if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight) continue;
        if (hl <= 0 || hr <= 0) continue;
        double wl = detail::leaf_weight(gl, hl, lam, tn.lower, tn.upper);
        double wr = detail::leaf_weight(gr, hr, lam, tn.lower, tn.upper);
        const int s = sign_[f];
        if (s != 0 && s * (wr - wl) < 0) continue;
        const double gain = parent_obj - detail::node_objective(gl, hl, lam, wl) -
                            detail::node_objective(gr, hr, lam, wr);
        if (gain > cfg_.min_split_gain && gain > best.gain) {
          best = {gain, static_cast<int>(f), static_cast<int>(b), wl, wr, hl, hr};
        }
      }
    }
    return best;
  }

  Tree grow(std::vector<std::uint32_t> rows, const std::vector<detail::GH>& gh,
            const std::vector<std::size_t>& feats) {
    Tree tree;
    split_bin_.clear();
    tree.nodes.emplace_back();
    split_bin_.push_back(0);
    std::vector<detail::GrowNode> level;
    level.push_back({0, std::move(rows), {}, 0, 0, 0});
    build_hist(level[0], gh, feats);
    const double lam = cfg_.lambda;

    auto finalize_leaf = [&](const detail::GrowNode& gn) {
      auto& tn = tree.nodes[static_cast<std::size_t>(gn.index)];
      tn.feature = -1;
      tn.cover = gn.H;
      tn.value = cfg_.learning_rate * detail::leaf_weight(gn.G, gn.H, lam, tn.lower, tn.upper);
    };

    while (!level.empty()) {
      std::vector<detail::GrowNode> next;
      for (auto& gn : level) {
        tree.nodes[static_cast<std::size_t>(gn.index)].cover = gn.H;
        if (gn.depth >= cfg_.max_depth) {
          finalize_leaf(gn);
          continue;
        }
        const auto choice = best_split(gn, tree.nodes[static_cast<std::size_t>(gn.index)], feats);
        if (choice.feature < 0) {
          finalize_leaf(gn);
          continue;
        }
        const auto f = static_cast<std::size_t>(choice.feature);
        const int li = static_cast<int>(tree.nodes.size());
        const int ri = li + 1;
        TreeNode parent = tree.nodes[static_cast<std::size_t>(gn.index)];
        TreeNode left, right;
        left.lower = right.lower = parent.lower;
        left.upper = right.upper = parent.upper;
        if (sign_[f] != 0) {
          const double mid = 0.5 * (choice.wl + choice.wr);
          if (sign_[f] > 0) {
            left.upper = mid;
            right.lower = mid;
          } else {
            left.lower = mid;
            right.upper = mid;
          }
        }
        auto& pn = tree.nodes[static_cast<std::size_t>(gn.index)];
        pn.feature = choice.feature;
        pn.threshold = B_.cuts[f][static_cast<std::size_t>(choice.bin)];
        pn.left = li;
        pn.right = ri;
        pn.value = cfg_.learning_rate * detail::leaf_weight(gn.G, gn.H, lam, pn.lower, pn.upper);
        split_bin_[static_cast<std::size_t>(gn.index)] = static_cast<std::uint8_t>(choice.bin);
        tree.nodes.push_back(left);
        tree.nodes.push_back(right);
        split_bin_.push_back(0);
        split_bin_.push_back(0);

        detail::GrowNode L{li, {}, {}, 0, 0, gn.depth + 1};
        detail::GrowNode R{ri, {}, {}, 0, 0, gn.depth + 1};
        for (auto r : gn.rows)
          (B_.bin(r, f) <= choice.bin ? L.rows : R.rows).push_back(r);
        // Build the smaller child directly, derive the sibling by subtraction.
        detail::GrowNode& small = L.rows.size() <= R.rows.size() ? L : R;
        detail::GrowNode& large = L.rows.size() <= R.rows.size() ? R : L;
        build_hist(small, gh, feats);
        large.hist = std::move(gn.hist);
        for (std::size_t k = 0; k < large.hist.size(); ++k) {
          large.hist[k].g -= small.hist[k].g;
          large.hist[k].h -= small.hist[k].h;
        }
        // Exact sums avoid drift from subtraction in the split search.
        large.G = 0;
        large.H = 0;
        for (auto r : large.rows) {
          large.G += gh[r].g;
          large.H += gh[r].h;
        }
        next.push_back(std::move(L));
        next.push_back(std::move(R));
      }
      level = std::move(next);
    }
    return tree;
  }

  const FeatureMatrix& X_;
  std::span<const double> y_;
  const FeatureMatrix* Xv_;
  std::span<const double> yv_;
  BoostConfig cfg_;
  detail::BinnedMatrix B_;
  std::vector<int> sign_;
  std::vector<std::uint8_t> split_bin_;
};

inline Ensemble train(const FeatureMatrix& X, std::span<const double> y, const FeatureMatrix& Xv,
                      std::span<const double> yv, const BoostConfig& cfg) {
  return Trainer(X, y, &Xv, yv, cfg).run();
}

inline Ensemble train(const FeatureMatrix& X, std::span<const double> y, const BoostConfig& cfg) {
  return Trainer(X, y, nullptr, {}, cfg).run();
}

struct MonotoneViolation {
  std::size_t row = 0;
  std::size_t grid_index = 0;  // violation between grid[k] and grid[k+1]
  double delta = 0;
};

struct MonotoneReport {
  std::string feature;
  int sign = 0;
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  std::vector<MonotoneViolation> examples;  // first few
};

// Sweeps `feature` over `grid` (ascending) for each context row. `sign`
// overrides the trained constraint when non-zero.
inline MonotoneReport enforce_monotone_check(const Ensemble& ens, const std::string& feature,
                                             std::span<const double> grid,
                                             const FeatureMatrix& context, int sign = 0) {
  MonotoneReport rep;
  rep.feature = feature;
  rep.sign = sign != 0 ? sign : ens.monotone_sign(feature);
  if (rep.sign == 0) return rep;
  const FeatureMatrix X = context.names == ens.feature_names ? context : context.select(ens.feature_names);
  const std::size_t f = X.column_index(feature);
  std::vector<double> row(X.cols());
  for (std::size_t r = 0; r < X.rows; ++r) {
    const auto src = X.row(r);
    std::copy(src.begin(), src.end(), row.begin());
    double prev = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      row[f] = grid[k];
      const double cur = ens.predict_row(row);
      if (k > 0) {
        ++rep.pairs_checked;
        const double delta = rep.sign * (cur - prev);
        if (delta < -1e-12) {
          ++rep.violations;
          if (rep.examples.size() < 10) rep.examples.push_back({r, k - 1, cur - prev});
        }
      }
      prev = cur;
    }
  }
  return rep;
}

// Structural check: for every split on a signed feature, all leaf values in
// the left subtree are ordered against all leaf values in the right subtree.
inline bool monotone_structure_ok(const Ensemble& ens) {
  for (const auto& t : ens.trees) {
    std::vector<double> lo(t.nodes.size()), hi(t.nodes.size());
    for (std::size_t k = t.nodes.size(); k-- > 0;) {
      const auto& n = t.nodes[k];
      if (n.is_leaf()) {
        lo[k] = hi[k] = n.value;
        continue;
      }
      const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
      lo[k] = std::min(lo[l], lo[r]);
      hi[k] = std::max(hi[l], hi[r]);
      const int s = ens.monotone_sign(ens.feature_names[static_cast<std::size_t>(n.feature)]);
      if (s > 0 && hi[l] > lo[r] + 1e-12) return false;
      if (s < 0 && lo[l] < hi[r] - 1e-12) return false;
    }
  }
  return true;
}

inline nlohmann::json to_json(const BoostConfig& c) {
  return {{"n_estimators", c.n_estimators}, {"max_depth", c.max_depth},
          {"learning_rate", c.learning_rate}, {"subsample", c.subsample},
          {"colsample", c.colsample}, {"early_stopping_rounds", c.early_stopping_rounds},
          {"objective", to_string(c.objective)}, {"tweedie_power", c.tweedie_power},
          {"monotone", c.monotone}, {"seed", c.seed},
          {"min_child_weight", c.min_child_weight}, {"lambda", c.lambda},
          {"max_bins", c.max_bins}, {"min_split_gain", c.min_split_gain},
          {"base_score", c.base_score ? nlohmann::json(*c.base_score) : nlohmann::json()}};
}

inline BoostConfig boost_config_from_json(const nlohmann::json& j) {
  BoostConfig c;
  c.n_estimators = j.at("n_estimators");
  c.max_depth = j.at("max_depth");
  c.learning_rate = j.at("learning_rate");
  c.subsample = j.at("subsample");
  c.colsample = j.at("colsample");
  c.early_stopping_rounds = j.at("early_stopping_rounds");
  c.objective = objective_from_string(j.at("objective").get<std::string>());
  c.tweedie_power = j.at("tweedie_power");
  c.monotone = j.at("monotone").get<std::map<std::string, int>>();
  c.seed = j.at("seed");
  c.min_child_weight = j.at("min_child_weight");
  c.lambda = j.at("lambda");
  c.max_bins = j.at("max_bins");
  c.min_split_gain = j.at("min_split_gain");
  if (j.contains("base_score") && !j.at("base_score").is_null()) c.base_score = j.at("base_score").get<double>();
  return c;
}

inline nlohmann::json to_json(const Ensemble& e) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : e.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.cover});
    trees.push_back(std::move(nodes));
  }
  return {{"config", to_json(e.config)}, {"feature_names", e.feature_names},
          {"base_score", e.base_score}, {"best_iteration", e.best_iteration},
          {"trees", trees}};
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  Ensemble e;
  e.config = boost_config_from_json(j.at("config"));
  e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  e.base_score = j.at("base_score");
  e.best_iteration = j.at("best_iteration");
  for (const auto& t : j.at("trees")) {
    Tree tree;
    for (const auto& n : t) {
      TreeNode node;
      node.feature = n.at(0);
      node.threshold = n.at(1);
      node.left = n.at(2);
      node.right = n.at(3);
      node.value = n.at(4);
      node.cover = n.at(5);
      tree.nodes.push_back(node);
    }
    e.trees.push_back(std::move(tree));
  }
  return e;
}

}  // namespace ambit::gbt
