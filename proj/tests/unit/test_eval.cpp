#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ambit/eval/holdout.hpp"
#include "ambit/eval/metrics.hpp"
#include "ambit/eval/seeds.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/synthetic.hpp"
#include "ambit/spatial/gravity.hpp"

using namespace ambit;
using eval::compute_metrics;

TEST(Metrics, PerfectPrediction) {
  std::vector<double> y{1, 2, 3};
  auto m = compute_metrics(y, y);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  ASSERT_TRUE(m.r2);
  EXPECT_NEAR(*m.r2, 1.0, 1e-12);
  EXPECT_EQ(m.smape, 0.0);
  EXPECT_NEAR(m.cpc, 1.0, 1e-12);
}

TEST(Metrics, DisjointSupportHasZeroCpc) {
  std::vector<double> y{1, 0}, p{0, 1};
  EXPECT_EQ(compute_metrics(y, p).cpc, 0.0);
}

TEST(Metrics, HandComputedCpcAndSmape) {
  std::vector<double> y{2, 2}, p{1, 3};
  auto m = compute_metrics(y, p);
  EXPECT_NEAR(m.cpc, 0.75, 1e-12);
  EXPECT_NEAR(m.smape, (2.0 / 3.0 + 2.0 / 5.0) / 2.0, 1e-12);
  EXPECT_NEAR(m.mae, 1.0, 1e-12);
  EXPECT_NEAR(m.rmse, 1.0, 1e-12);
  EXPECT_FALSE(m.r2.has_value());
}

TEST(Metrics, ConstantObservedLeavesR2Undefined) {
  std::vector<double> y{3, 3, 3}, p{1, 2, 3};
  EXPECT_FALSE(compute_metrics(y, p).r2.has_value());
}

TEST(Metrics, NegativePredictionsAreClipped) {
  std::vector<double> y{0, 2}, p{-5, 2};
  auto m = compute_metrics(y, p);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.smape, 0.0);
}

TEST(Metrics, SmapeIsTwoWhenExactlyOneSideIsZero) {
  std::vector<double> y{0, 4}, p{3, 0};
  EXPECT_NEAR(compute_metrics(y, p).smape, 2.0, 1e-12);
}

TEST(Metrics, ErrorsOnBadInput) {
  std::vector<double> a{1}, b{1, 2}, e;
  EXPECT_THROW(compute_metrics(a, b), Error);
  EXPECT_THROW(compute_metrics(e, e), EmptyTaskError);
}

TEST(Metrics, PropertiesOnRandomInputs) {
  std::mt19937_64 rng(5);
  std::poisson_distribution<int> pois(3.0);
  std::uniform_real_distribution<double> u(-1.0, 8.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = pois(rng);
      p[i] = u(rng);
    }
    auto m = compute_metrics(y, p);
    EXPECT_GE(m.cpc, 0.0);
    EXPECT_LE(m.cpc, 1.0);
    EXPECT_GE(m.smape, 0.0);
    EXPECT_LE(m.smape, 2.0);
    EXPECT_GE(m.rmse + 1e-12, m.mae);
    EXPECT_GE(m.mae, 0.0);

    // symmetry of CPC on non-negative inputs
    std::vector<double> pc(n);
    for (std::size_t i = 0; i < n; ++i) pc[i] = std::max(0.0, p[i]);
    EXPECT_NEAR(eval::cpc(y, pc), eval::cpc(pc, y), 1e-12);

    // row permutation
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> yp(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      yp[i] = y[perm[i]];
      pp[i] = p[perm[i]];
    }
    auto mp = compute_metrics(yp, pp);
    EXPECT_NEAR(mp.mae, m.mae, 1e-12);
    EXPECT_NEAR(mp.rmse, m.rmse, 1e-12);
    EXPECT_NEAR(mp.cpc, m.cpc, 1e-12);
    EXPECT_NEAR(mp.smape, m.smape, 1e-12);

    double sy = std::accumulate(y.begin(), y.end(), 0.0);
    if (sy > 0) EXPECT_NEAR(eval::cpc(y, y), 1.0, 1e-12);

    // mean predictor has R^2 = 0
    const double ybar = sy / static_cast<double>(n);
    std::vector<double> mean_pred(n, ybar);
    auto mm = compute_metrics(y, mean_pred);
    if (mm.r2) EXPECT_NEAR(*mm.r2, 0.0, 1e-12);
  }
}

namespace {
std::vector<od::FlowRow> rows_at(std::initializer_list<std::pair<od::HourStamp, std::int64_t>> v) {
  std::vector<od::FlowRow> out;
  od::ZoneIndex k = 0;
  for (auto [h, f] : v) out.push_back({k, static_cast<od::ZoneIndex>(k + 1), h, f}), ++k;
  return out;
}
}  // namespace

TEST(HourAveragedCpc, SingleHourEqualsGlobal) {
  auto rows = rows_at({{5, 2}, {5, 4}, {5, 1}});
  std::vector<double> p{1, 5, 0};
  auto y = eval::observed(rows);
  EXPECT_NEAR(eval::cpc_hour_averaged(rows, p), eval::cpc(y, p), 1e-12);
}

TEST(HourAveragedCpc, MeanOfPerHourValues) {
  // hour 1 exact (cpc 1); hour 2: y=2, p=[2,0] against y=[1,1] gives 2*1/(2+2)=0.5
  auto rows = rows_at({{1, 3}, {2, 1}, {2, 1}});
  std::vector<double> p{3, 2, 0};
  EXPECT_NEAR(eval::cpc_hour_averaged(rows, p), 0.75, 1e-12);
}

TEST(QuantileDiagnostics, TercilesOfOneToNine) {
  std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto q = eval::quantile_diagnostics(y, y, 3);
  ASSERT_EQ(q.bins.size(), 3u);
  EXPECT_FALSE(q.degenerate);
  for (const auto& b : q.bins) {
    EXPECT_EQ(b.rows.size(), 3u);
    EXPECT_EQ(b.metrics.mae, 0.0);
  }
  EXPECT_EQ(q.bins[0].label, "Q1");
  EXPECT_EQ(q.bins[2].label, "Q3");
}

TEST(QuantileDiagnostics, DegenerateDistributionIsOneBin) {
  std::vector<double> y(7, 4.0), p(7, 3.0);
  auto q = eval::quantile_diagnostics(y, p, 3);
  EXPECT_TRUE(q.degenerate);
  ASSERT_EQ(q.bins.size(), 1u);
  EXPECT_EQ(q.bins[0].rows.size(), 7u);
}

TEST(QuantileDiagnostics, MatchesSortOracle) {
  std::mt19937_64 rng(9);
  std::geometric_distribution<int> g(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(60), p(60, 1.0);
    for (auto& v : y) v = 1 + g(rng);
    auto q = eval::quantile_diagnostics(y, p, 3);
    std::size_t total = 0;
    for (const auto& b : q.bins) total += b.rows.size();
    EXPECT_EQ(total, y.size());
    // oracle: bin index = number of edges strictly below the value
    for (std::size_t b = 0; b < q.bins.size(); ++b)
      for (auto i : q.bins[b].rows) {
        std::size_t below = 0;
        for (double e : q.edges)
          if (e < y[i]) ++below;
        EXPECT_EQ(below, b);
      }
  }
}

TEST(SeedStats, TextbookInterval) {
  std::vector<double> v{1, 2, 3};
  auto s = eval::aggregate_seed_stats(v, 0.95);
  EXPECT_NEAR(s.mean, 2.0, 1e-12);
  EXPECT_TRUE(s.has_interval);
  EXPECT_NEAR(s.half_width, 4.302652729911275 / std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(s.half_width, 2.484, 1e-3);
}

TEST(SeedStats, IdenticalValuesHaveZeroWidth) {
  std::vector<double> v{0.7, 0.7, 0.7, 0.7};
  auto s = eval::aggregate_seed_stats(v);
  EXPECT_EQ(s.half_width, 0.0);
}

TEST(SeedStats, SingleSeedHasMeanOnly) {
  std::vector<double> v{1.5};
  auto s = eval::aggregate_seed_stats(v);
  EXPECT_FALSE(s.has_interval);
  EXPECT_EQ(s.mean, 1.5);
}

TEST(SeedStats, WiderThanBootstrapPercentileOnSmallSamples) {
  // On five draws the t interval should dominate the naive bootstrap
  // percentile interval of the mean.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(1.0, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(5);
    for (auto& x : v) x = nd(rng);
    auto s = eval::aggregate_seed_stats(v);
    std::vector<double> boots;
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    for (int b = 0; b < 2000; ++b) {
      double m = 0;
      for (std::size_t i = 0; i < v.size(); ++i) m += v[pick(rng)];
      boots.push_back(m / v.size());
    }
    std::sort(boots.begin(), boots.end());
    const double lo = quantile_sorted(boots, 0.025), hi = quantile_sorted(boots, 0.975);
    EXPECT_LE(s.mean - s.half_width, lo);
    EXPECT_GE(s.mean + s.half_width, hi);
  }
}

TEST(Timing, StopwatchIsPositive) {
  eval::Stopwatch sw;
  volatile double x = 0;
  for (int i = 0; i < 1000; ++i) x = x + std::sqrt(static_cast<double>(i));
  EXPECT_GT(sw.seconds(), 0.0);
}

namespace {
od::ZoneTable small_zones(int n) {
  std::vector<od::Zone> zs;
  for (int i = 0; i < n; ++i) {
    od::Zone z;
    z.id = i + 1;
    z.x_m = 1000.0 * i;
    z.borough = i % 2 ? "East" : "West";
    z.poi = {i + 1, 0, 0};
    zs.push_back(z);
  }
  return od::ZoneTable(zs);
}
}  // namespace

TEST(Holdout, SingleHeldZoneTouchesEveryEvalRow) {
  auto zones = small_zones(12);
  eval::HoldoutSpec spec;
  spec.fraction = 0.05;
  auto held = eval::select_holdout_zones(zones, spec);
  ASSERT_EQ(held.size(), 1u);
  std::vector<od::FlowRow> rows;
  for (od::ZoneIndex o = 0; o < 12; ++o)
    for (od::ZoneIndex d = 0; d < 12; ++d)
      if (o != d) rows.push_back({o, d, 0, 1});
  auto split = eval::split_holdout(rows, rows, zones.size(), held);
  for (const auto& r : split.eval) EXPECT_TRUE(r.origin == held[0] || r.dest == held[0]);
  for (const auto& r : split.train) {
    EXPECT_NE(r.origin, held[0]);
    EXPECT_NE(r.dest, held[0]);
  }
  EXPECT_EQ(split.train.size() + split.eval.size(), rows.size());
}

TEST(Holdout, BoroughSelection) {
  auto zones = small_zones(6);
  eval::HoldoutSpec spec;
  spec.mode = eval::HoldoutMode::borough;
  spec.borough = "East";
  auto held = eval::select_holdout_zones(zones, spec);
  EXPECT_EQ(held, (std::vector<od::ZoneIndex>{1, 3, 5}));
  spec.borough = "North";
  EXPECT_THROW(eval::select_holdout_zones(zones, spec), ConfigError);
}

TEST(Holdout, EmptyEvalSetIsAnError) {
  std::vector<od::FlowRow> rows{{0, 1, 0, 1}};
  EXPECT_THROW(eval::split_holdout(rows, rows, 4, {3}), EmptyTaskError);
}

TEST(Holdout, InvalidFraction) {
  auto zones = small_zones(5);
  eval::HoldoutSpec spec;
  spec.fraction = 1.0;
  EXPECT_THROW(eval::select_holdout_zones(zones, spec), ConfigError);
}

TEST(Holdout, MassPolicies) {
  auto zones = small_zones(4);
  od::MassVector m;
  m.definition = od::MassDefinition::flow_out_total;
  m.m = {10, 20, 30, 40};
  std::vector<bool> held{false, false, true, false};
  auto z = eval::apply_mass_policy(m, zones, held, eval::MassPolicy::zero);
  EXPECT_EQ(z.m[2], od::kMassEpsilon);
  auto b = eval::apply_mass_policy(m, zones, held, eval::MassPolicy::borough_imputed);
  EXPECT_EQ(b.m[2], 10.0);  // only West training zone is index 0
  od::MassVector poi = m;
  poi.definition = od::MassDefinition::poi_total;
  EXPECT_EQ(eval::apply_mass_policy(poi, zones, held, eval::MassPolicy::zero).m, poi.m);
}

TEST(Holdout, BoroughImputationRaisesFlowGravityCpc) {
  od::SyntheticConfig cfg;
  cfg.n_zones = 30;
  cfg.n_hours = 24 * 14;
  cfg.seed = 17;
  auto city = od::generate_synthetic_city(cfg);
  const auto imp = od::euclidean_impedance(city.zones);
  const od::HourStamp train_end = cfg.start + 24 * 10;
  std::vector<od::FlowRow> train, test;
  for (const auto& r : city.flows) (r.hour < train_end ? train : test).push_back(r);
  eval::HoldoutSpec spec;
  spec.seed = 4;
  auto split = eval::split_holdout(train, test, city.zones.size(),
                                   eval::select_holdout_zones(city.zones, spec));
  auto mo = od::make_masses(split.train, city.zones, od::MassDefinition::flow_out_total, train_end);
  auto md = od::make_masses(split.train, city.zones, od::MassDefinition::flow_in_total, train_end);
  auto p = spatial::fit_gravity_unconstrained(split.train, mo, md, imp);
  auto y = eval::observed(split.eval);

  auto cpc_with = [&](eval::MassPolicy pol) {
    auto a = eval::apply_mass_policy(mo, city.zones, split.is_held, pol);
    auto b = eval::apply_mass_policy(md, city.zones, split.is_held, pol);
    return compute_metrics(y, spatial::predict_gravity(p, a, b, imp, split.eval)).cpc;
  };
  EXPECT_GT(cpc_with(eval::MassPolicy::borough_imputed), cpc_with(eval::MassPolicy::zero));
}

TEST(ZoneErrors, AveragePerOrigin) {
  std::vector<od::FlowRow> rows{{0, 1, 0, 2}, {0, 2, 0, 4}, {1, 0, 0, 1}};
  std::vector<double> p{1, 4, 3};
  auto z = eval::zone_errors(rows, p);
  ASSERT_EQ(z.size(), 2u);
  EXPECT_NEAR(z[0].mae, 0.5, 1e-12);
  EXPECT_NEAR(z[0].smape, (2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(z[1].mae, 2.0, 1e-12);
}
