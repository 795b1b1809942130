#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "ambit/od/synthetic.hpp"
#include "ambit/spatial/constrained.hpp"
#include "ambit/spatial/gravity.hpp"
#include "ambit/spatial/ipf.hpp"
#include "ambit/spatial/opportunity.hpp"
#include "ambit/spatial/tuning.hpp"

using namespace ambit;
using spatial::GravityParams;

namespace {

od::ZoneTable line_zones(int n, double spacing_m = 1000.0) {
  std::vector<od::Zone> zs;
  for (int i = 0; i < n; ++i) {
    od::Zone z;
    z.id = i + 1;
    z.x_m = spacing_m * i;
    zs.push_back(z);
  }
  return od::ZoneTable(zs);
}

od::MassVector masses(std::vector<double> m, od::MassDefinition def = od::MassDefinition::poi_total) {
  od::MassVector v;
  v.m = std::move(m);
  v.definition = def;
  return v;
}

od::ImpedanceMatrix random_impedance(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 10000);
  std::vector<od::Zone> zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    zs[i].id = static_cast<int>(i) + 1;
    zs[i].x_m = u(rng);
    zs[i].y_m = u(rng);
  }
  return od::euclidean_impedance(od::ZoneTable(zs));
}

spatial::HourlyMargins flat_margins(std::vector<double> O, std::vector<double> D) {
  spatial::HourlyMargins m;
  m.n = O.size();
  for (std::size_t s = 0; s < spatial::kSlices; ++s) {
    m.O[s] = O;
    m.D[s] = D;
  }
  return m;
}

double row_sum(const spatial::SliceMatrices& m, std::size_t slice, std::size_t i) {
  double s = 0;
  for (std::size_t j = 0; j < m.n; ++j) s += m.at(slice, i, j);
  return s;
}

}  // namespace

TEST(Gravity, RateExamples) {
  GravityParams p;
  p.beta = 0;
  EXPECT_DOUBLE_EQ(spatial::gravity_rate(p, 2, 3, 5), 6.0);
  GravityParams q;
  q.k = 2;
  q.beta = 2;
  EXPECT_DOUBLE_EQ(spatial::gravity_rate(q, 1, 1, 2), 0.5);
  GravityParams e;
  e.beta = std::log(2.0);
  e.decay_form = od::DecayForm::exponential;
  EXPECT_NEAR(spatial::gravity_rate(e, 2, 2, 1), 2.0, 1e-12);
}

TEST(Gravity, ExactLogLinearRecovery) {
  // Powers of two keep T = 2 m_o m_d / d^2 integral.
  std::mt19937_64 rng(1);
  const std::size_t n = 12;
  std::uniform_int_distribution<int> em(3, 8), ed(0, 3);
  std::vector<double> mo(n), md(n);
  for (auto& v : mo) v = std::ldexp(1.0, em(rng));
  for (auto& v : md) v = std::ldexp(1.0, em(rng));
  od::ImpedanceMatrix imp;
  imp.n = n;
  imp.d.assign(n * n, 1.0);
  std::vector<od::FlowRow> rows;
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t d = 0; d < n; ++d) {
      if (o == d) continue;
      imp.at(o, d) = std::ldexp(1.0, ed(rng));
      const double t = 2.0 * mo[o] * md[d] / (imp(o, d) * imp(o, d));
      rows.push_back({static_cast<od::ZoneIndex>(o), static_cast<od::ZoneIndex>(d), 0,
                      static_cast<std::int64_t>(t)});
    }
  auto p = spatial::fit_gravity_unconstrained(rows, masses(mo), masses(md), imp);
  EXPECT_NEAR(p.k, 2.0, 1e-8);
  EXPECT_NEAR(p.alpha, 1.0, 1e-8);
  EXPECT_NEAR(p.gamma, 1.0, 1e-8);
  EXPECT_NEAR(p.beta, 2.0, 1e-8);
}

TEST(Gravity, ConstantDistanceIsRankDeficient) {
  std::vector<od::FlowRow> rows;
  for (od::ZoneIndex o = 0; o < 5; ++o)
    for (od::ZoneIndex d = 0; d < 5; ++d)
      if (o != d) rows.push_back({o, d, 0, 1 + o + 2 * d});
  od::ImpedanceMatrix imp;
  imp.n = 5;
  imp.d.assign(25, 3.0);
  auto m = masses({1, 2, 3, 4, 5});
  try {
    spatial::fit_gravity_unconstrained(rows, m, masses({5, 1, 4, 2, 3}), imp);
    FAIL();
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("log_d"), std::string::npos);
  }
}

TEST(Gravity, PoissonNoiseRecoversManifest) {
  od::SyntheticConfig cfg;
  cfg.n_zones = 50;
  cfg.n_hours = 48;
  cfg.target_mean = 20;
  cfg.seed = 8;
  auto city = od::generate_synthetic_city(cfg);
  auto imp = od::euclidean_impedance(city.zones);
  auto m = masses(city.mass);
  auto p = spatial::fit_gravity_unconstrained(city.flows.rows(), m, m, imp);
  // positive-only log-OLS is biased where the rate is small, hence the
  // generous mean of 20
  EXPECT_NEAR(p.alpha, cfg.alpha, 0.1);
  EXPECT_NEAR(p.gamma, cfg.gamma, 0.1);
  EXPECT_NEAR(p.beta, cfg.beta, 0.1);
}

TEST(Gravity, ZeroBetaProcess) {
  od::SyntheticConfig cfg;
  cfg.n_zones = 30;
  cfg.n_hours = 24;
  cfg.beta = 0;
  cfg.target_mean = 30;
  auto city = od::generate_synthetic_city(cfg);
  auto imp = od::euclidean_impedance(city.zones);
  auto m = masses(city.mass);
  auto p = spatial::fit_gravity_unconstrained(city.flows.rows(), m, m, imp);
  EXPECT_NEAR(p.beta, 0.0, 0.05);
}

TEST(Gravity, SegmentedFitsAreIndependent) {
  od::SyntheticConfig cfg;
  cfg.n_zones = 15;
  cfg.n_hours = 24 * 7;
  cfg.temporal_amplitude = 1.0;
  cfg.target_mean = 5;
  auto city = od::generate_synthetic_city(cfg);
  auto imp = od::euclidean_impedance(city.zones);
  auto m = masses(city.mass);
  auto g = spatial::fit_gravity_segmented(city.flows.rows(), m, m, imp);
  std::set<double> ks;
  for (const auto& s : g.segments) ks.insert(s.k);
  EXPECT_EQ(ks.size(), 24u);
}

TEST(Ipf, RankOneSeedOneStep) {
  Eigen::MatrixXd seed = Eigen::MatrixXd::Ones(2, 2);
  std::vector<double> O{1, 3}, D{2, 2};
  auto cal = spatial::calibrate_ipf(seed, O, D);
  ASSERT_TRUE(cal.converged);
  auto t = cal.apply(seed);
  EXPECT_NEAR(t(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(t(0, 1), 0.5, 1e-12);
  EXPECT_NEAR(t(1, 0), 1.5, 1e-12);
  EXPECT_NEAR(t(1, 1), 1.5, 1e-12);
}

TEST(Ipf, FixedPoint) {
  Eigen::MatrixXd seed(2, 3);
  seed << 1, 2, 3, 4, 5, 6;
  std::vector<double> O{6, 15}, D{5, 7, 9};
  auto cal = spatial::calibrate_ipf(seed, O, D);
  EXPECT_TRUE(cal.converged);
  EXPECT_EQ(cal.iterations, 1);
  for (double a : cal.A) EXPECT_NEAR(a, 1.0, 1e-12);
  for (double b : cal.B) EXPECT_NEAR(b, 1.0, 1e-12);
}

TEST(Ipf, RandomInstancesMatchMargins) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 10);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd seed(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) seed(i, j) = u(rng);
    std::vector<double> O(10), D(10);
    for (auto& v : O) v = u(rng);
    for (auto& v : D) v = u(rng);
    auto cal = spatial::calibrate_ipf(seed, O, D);
    ASSERT_TRUE(cal.converged);
    auto t = cal.apply(seed);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(t.row(i).sum(), O[i], 1e-6 * O[i]);
    for (int j = 0; j < 10; ++j) EXPECT_NEAR(t.col(j).sum(), cal.D[j], 1e-6 * cal.D[j]);
    for (double a : cal.A) EXPECT_GT(a, 0);
    for (double b : cal.B) EXPECT_GT(b, 0);
  }
}

TEST(Ipf, InfeasibleStructuralZerosAreFlagged) {
  // row 0 can only reach column 0, but column 0 wants less than row 0 sends
  Eigen::MatrixXd seed(2, 2);
  seed << 1, 0, 1, 1;
  std::vector<double> O{5, 1}, D{1, 5};
  auto cal = spatial::calibrate_ipf(seed, O, D, 1e-6, 50);
  EXPECT_FALSE(cal.converged);
  EXPECT_EQ(cal.iterations, 50);
}

TEST(Constrained, SingleDestinationGetsWholeOutflow) {
  auto zones = line_zones(2);
  auto imp = od::euclidean_impedance(zones);
  spatial::ConstrainedSpec spec;
  auto fit = spatial::predict_constrained(spec, masses({1, 4}), imp, flat_margins({7, 3}, {3, 7}));
  EXPECT_NEAR(fit.matrices.at(0, 0, 1), 7.0, 1e-12);
  EXPECT_NEAR(fit.matrices.at(5, 1, 0), 3.0, 1e-12);
}

TEST(Constrained, EquidistantEqualMassSplitsInHalf) {
  std::vector<od::Zone> zs(3);
  for (int i = 0; i < 3; ++i) zs[i].id = i + 1;
  zs[1].x_m = 1000;
  zs[2].x_m = -1000;
  auto imp = od::euclidean_impedance(od::ZoneTable(zs));
  spatial::ConstrainedSpec spec;
  auto fit = spatial::predict_constrained(spec, masses({5, 2, 2}), imp, flat_margins({8, 1, 1}, {1, 1, 1}));
  EXPECT_NEAR(fit.matrices.at(3, 0, 1), 4.0, 1e-12);
  EXPECT_NEAR(fit.matrices.at(3, 0, 2), 4.0, 1e-12);
}

TEST(Constrained, OriginRowSumsMatchMargins) {
  std::mt19937_64 rng(2);
  auto imp = random_impedance(9, rng);
  std::uniform_real_distribution<double> u(0.5, 20);
  std::vector<double> mv(9), O(9), D(9);
  for (auto& v : mv) v = u(rng);
  for (auto& v : O) v = u(rng);
  for (auto& v : D) v = u(rng);
  for (auto form : {od::DecayForm::power, od::DecayForm::exponential}) {
    spatial::ConstrainedSpec spec;
    spec.decay_form = form;
    auto fit = spatial::predict_constrained(spec, masses(mv), imp, flat_margins(O, D));
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(row_sum(fit.matrices, 0, i), O[i], 1e-9 * O[i]);
    for (double v : fit.matrices.slices[0]) EXPECT_GE(v, 0.0);
  }
}

TEST(Constrained, DestinationColumnSumsMatchMargins) {
  std::mt19937_64 rng(3);
  auto imp = random_impedance(7, rng);
  std::vector<double> mv{1, 2, 3, 4, 5, 6, 7}, O(7, 1.0), D{2, 4, 6, 8, 1, 3, 5};
  spatial::ConstrainedSpec spec;
  spec.variant = spatial::ConstrainedVariant::destination;
  auto fit = spatial::predict_constrained(spec, masses(mv), imp, flat_margins(O, D));
  for (std::size_t j = 0; j < 7; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < 7; ++i) s += fit.matrices.at(0, i, j);
    EXPECT_NEAR(s, D[j], 1e-9 * D[j]);
  }
}

TEST(Constrained, DoublyMatchesBothMarginsPerSlice) {
  std::mt19937_64 rng(4);
  auto imp = random_impedance(8, rng);
  std::uniform_real_distribution<double> u(0.5, 5);
  spatial::HourlyMargins m;
  m.n = 8;
  for (std::size_t s = 0; s < spatial::kSlices; ++s) {
    m.O[s].resize(8);
    m.D[s].resize(8);
    for (auto& v : m.O[s]) v = u(rng);
    double so = std::accumulate(m.O[s].begin(), m.O[s].end(), 0.0), sd = 0;
    for (auto& v : m.D[s]) sd += (v = u(rng));
    for (auto& v : m.D[s]) v *= so / sd;
  }
  spatial::ConstrainedSpec spec;
  spec.variant = spatial::ConstrainedVariant::doubly;
  auto fit = spatial::predict_constrained(spec, masses(std::vector<double>(8, 1.0)), imp, m);
  for (std::size_t s = 0; s < spatial::kSlices; ++s) {
    ASSERT_TRUE(fit.converged[s]);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(row_sum(fit.matrices, s, i), m.O[s][i], 1e-6 * m.O[s][i]);
    for (std::size_t j = 0; j < 8; ++j) {
      double c = 0;
      for (std::size_t i = 0; i < 8; ++i) c += fit.matrices.at(s, i, j);
      EXPECT_NEAR(c, m.D[s][j], 1e-6 * m.D[s][j]);
    }
  }
}

TEST(Constrained, MassScalingLeavesAllocationUnchanged) {
  std::mt19937_64 rng(5);
  auto imp = random_impedance(6, rng);
  std::vector<double> mv{1, 3, 5, 2, 8, 4}, scaled;
  for (double v : mv) scaled.push_back(v * 17.0);
  auto margins = flat_margins({1, 2, 3, 4, 5, 6}, {6, 5, 4, 3, 2, 1});
  spatial::ConstrainedSpec spec;
  auto a = spatial::predict_constrained(spec, masses(mv), imp, margins);
  auto b = spatial::predict_constrained(spec, masses(scaled), imp, margins);
  for (std::size_t k = 0; k < a.matrices.slices[0].size(); ++k)
    EXPECT_NEAR(a.matrices.slices[0][k], b.matrices.slices[0][k], 1e-12);
}

TEST(Constrained, HourlyMarginsAverageOverCalendarHours) {
  const od::HourStamp t0 = od::make_hour(2025, 1, 6);
  // two days: slice 8 sees flows 4 and 6 from zone 0 -> mean 5
  std::vector<od::FlowRow> rows{{0, 1, t0 + 8, 4}, {0, 1, t0 + 32, 6}, {1, 0, t0 + 9, 2}};
  auto m = spatial::compute_hourly_margins(rows, 2, t0, t0 + 48);
  EXPECT_DOUBLE_EQ(m.O[8][0], 5.0);
  EXPECT_DOUBLE_EQ(m.D[8][1], 5.0);
  EXPECT_DOUBLE_EQ(m.O[9][1], 1.0);
  auto out = spatial::mean_hourly_outflow(rows, 2, t0, t0 + 48);
  EXPECT_DOUBLE_EQ(out[0], 10.0 / 48.0);
}

TEST(CompetingDestinations, RhoZeroIsOriginConstrained) {
  std::mt19937_64 rng(6);
  auto imp = random_impedance(7, rng);
  auto mv = masses({1, 4, 2, 8, 5, 7, 3});
  auto margins = flat_margins({1, 2, 3, 4, 5, 6, 7}, {1, 1, 1, 1, 1, 1, 1});
  spatial::CompetingDestParams p;
  p.base.beta = 1.3;
  p.base.gamma = 0.8;
  p.rho = 0;
  spatial::ConstrainedSpec spec;
  spec.beta = 1.3;
  spec.mass_exponent = 0.8;
  auto a = spatial::predict_competing_destinations(p, mv, imp, margins);
  auto b = spatial::predict_constrained(spec, mv, imp, margins);
  for (std::size_t k = 0; k < a.matrices.slices[0].size(); ++k)
    EXPECT_NEAR(a.matrices.slices[0][k], b.matrices.slices[0][k], 1e-12);
}

TEST(CompetingDestinations, SymmetricTriangle) {
  std::vector<od::Zone> zs(3);
  for (int i = 0; i < 3; ++i) {
    zs[i].id = i + 1;
    zs[i].x_m = 1000 * std::cos(2 * M_PI * i / 3);
    zs[i].y_m = 1000 * std::sin(2 * M_PI * i / 3);
  }
  auto imp = od::euclidean_impedance(od::ZoneTable(zs));
  auto mv = masses({1, 1, 1});
  auto acc = spatial::accessibility(mv, imp, 1.0);
  EXPECT_NEAR(acc[0], acc[1], 1e-12);
  EXPECT_NEAR(acc[1], acc[2], 1e-12);
  auto margins = flat_margins({3, 3, 3}, {3, 3, 3});
  spatial::CompetingDestParams p;
  p.rho = 1.5;
  auto a = spatial::predict_competing_destinations(p, mv, imp, margins);
  auto b = spatial::predict_constrained({}, mv, imp, margins);
  for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(a.matrices.slices[0][k], b.matrices.slices[0][k], 1e-12);
}

TEST(CompetingDestinations, LineGraphTwoStageOracle) {
  auto zones = line_zones(5);
  auto imp = od::euclidean_impedance(zones);
  std::vector<double> m{2, 1, 3, 5, 4};
  std::vector<double> O{1, 2, 3, 4, 5};
  spatial::CompetingDestParams p;
  p.base.beta = 1.0;
  p.base.gamma = 1.0;
  p.rho = 1.0;
  p.delta = 1.0;
  auto fit = spatial::predict_competing_destinations(p, masses(m), imp, flat_margins(O, O));
  // stage 1: accessibility on the line with unit spacing
  std::vector<double> A(5, 0);
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k)
      if (k != j) A[j] += m[k] / std::abs(j - k);
  // stage 2: origin-constrained shares
  for (int i = 0; i < 5; ++i) {
    double tot = 0;
    for (int j = 0; j < 5; ++j)
      if (j != i) tot += m[j] * A[j] / std::abs(i - j);
    for (int j = 0; j < 5; ++j) {
      const double want = j == i ? 0.0 : O[i] * m[j] * A[j] / std::abs(i - j) / tot;
      EXPECT_NEAR(fit.matrices.at(0, i, j), want, 1e-12);
    }
  }
}

TEST(Opportunity, FieldExcludesEndpointsAndTies) {
  auto zones = line_zones(4);
  auto imp = od::euclidean_impedance(zones);
  auto f = spatial::build_opportunity_field(masses({1, 2, 4, 8}), imp);
  EXPECT_EQ(f(0, 1), 0.0);
  EXPECT_EQ(f(0, 2), 2.0);
  EXPECT_EQ(f(0, 3), 6.0);
  EXPECT_EQ(f(3, 0), 6.0);
  // zones 0 and 2 are equidistant from 1: neither counts for the other
  EXPECT_EQ(f(1, 0), 0.0);
  EXPECT_EQ(f(1, 2), 0.0);
  EXPECT_EQ(f(1, 3), 5.0);
}

TEST(Opportunity, FieldNonDecreasingInDistance) {
  std::mt19937_64 rng(7);
  auto imp = random_impedance(15, rng);
  std::vector<double> mv(15);
  std::uniform_real_distribution<double> u(1, 10);
  for (auto& v : mv) v = u(rng);
  auto f = spatial::build_opportunity_field(masses(mv), imp);
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t j = 0; j < 15; ++j)
      for (std::size_t k = 0; k < 15; ++k)
        if (j != i && k != i && imp(i, j) <= imp(i, k)) EXPECT_LE(f(i, j), f(i, k) + 1e-12);
}

TEST(Radiation, PlugIn) {
  EXPECT_DOUBLE_EQ(spatial::radiation_share(1, 1, 0), 0.5);
  EXPECT_LT(spatial::radiation_share(1, 1, 1e9), 1e-17);
}

TEST(Radiation, BruteForceTenZones) {
  std::mt19937_64 rng(8);
  auto imp = random_impedance(10, rng);
  std::uniform_real_distribution<double> u(1, 50);
  std::vector<double> mv(10), out(10);
  for (auto& v : mv) v = u(rng);
  for (auto& v : out) v = u(rng);
  auto opp = spatial::build_opportunity_field(masses(mv), imp);
  auto r = spatial::predict_radiation(masses(mv), opp, out);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      double want = 0;
      if (i != j) {
        double s = 0;
        for (std::size_t k = 0; k < 10; ++k)
          if (k != i && k != j && imp(i, k) < imp(i, j)) s += mv[k];
        want = out[i] * mv[i] * mv[j] / ((mv[i] + s) * (mv[i] + mv[j] + s));
      }
      EXPECT_NEAR(r.at(0, i, j), want, 1e-12 * std::max(1.0, want));
    }
}

TEST(Radiation, NonIncreasingInOpportunities) {
  for (double s = 0; s < 100; s += 1.0)
    EXPECT_GE(spatial::radiation_share(3, 2, s), spatial::radiation_share(3, 2, s + 1));
}

TEST(OpportunityModels, SingleDestinationReturnsOutflow) {
  auto zones = line_zones(2);
  auto imp = od::euclidean_impedance(zones);
  auto mv = masses({3, 5});
  auto opp = spatial::build_opportunity_field(mv, imp);
  std::vector<double> out{4, 9};
  for (auto v : {spatial::OpportunityVariant::intervening, spatial::OpportunityVariant::ops}) {
    auto m = spatial::predict_opportunity_model(v, opp, mv, out, 0.1);
    EXPECT_NEAR(m.at(0, 0, 1), 4.0, 1e-12);
    EXPECT_NEAR(m.at(0, 1, 0), 9.0, 1e-12);
  }
}

TEST(OpportunityModels, SmallLLimitIsMassProportional) {
  std::mt19937_64 rng(9);
  auto imp = random_impedance(6, rng);
  std::vector<double> mv{1, 2, 3, 4, 5, 6};
  auto opp = spatial::build_opportunity_field(masses(mv), imp);
  std::vector<double> out(6, 1.0);
  auto m = spatial::predict_opportunity_model(spatial::OpportunityVariant::intervening, opp, masses(mv), out, 1e-9);
  for (std::size_t i = 0; i < 6; ++i) {
    const double tot = 21.0 - mv[i];
    for (std::size_t j = 0; j < 6; ++j)
      if (j != i) EXPECT_NEAR(m.at(0, i, j), mv[j] / tot, 1e-7);
  }
}

TEST(OpportunityModels, EightZoneHandEvaluation) {
  std::mt19937_64 rng(10);
  auto imp = random_impedance(8, rng);
  std::vector<double> mv{3, 1, 4, 1, 5, 9, 2, 6}, out{1, 2, 3, 4, 5, 6, 7, 8};
  auto opp = spatial::build_opportunity_field(masses(mv), imp);
  const double L = 0.05;
  auto io = spatial::predict_opportunity_model(spatial::OpportunityVariant::intervening, opp, masses(mv), out, L);
  auto ops = spatial::predict_opportunity_model(spatial::OpportunityVariant::ops, opp, masses(mv), out, L);
  for (std::size_t i = 0; i < 8; ++i) {
    std::vector<double> wi(8, 0), wo(8, 0);
    double ti = 0, to = 0;
    for (std::size_t j = 0; j < 8; ++j) {
      if (j == i) continue;
      double s = 0;
      for (std::size_t k = 0; k < 8; ++k)
        if (k != i && k != j && imp(i, k) < imp(i, j)) s += mv[k];
      wi[j] = std::exp(-L * s) - std::exp(-L * (s + mv[j]));
      wo[j] = mv[j] / (mv[i] + s + mv[j]);
      ti += wi[j];
      to += wo[j];
    }
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(io.at(0, i, j), out[i] * wi[j] / ti, 1e-12);
      EXPECT_NEAR(ops.at(0, i, j), out[i] * wo[j] / to, 1e-12);
    }
  }
}

TEST(OpportunityModels, InterveningNeedsPositiveL) {
  auto zones = line_zones(3);
  auto imp = od::euclidean_impedance(zones);
  auto mv = masses({1, 1, 1});
  auto opp = spatial::build_opportunity_field(mv, imp);
  std::vector<double> out{1, 1, 1};
  EXPECT_THROW(spatial::predict_opportunity_model(spatial::OpportunityVariant::intervening, opp, mv, out, 0.0),
               ConfigError);
}

TEST(Tuning, SingletonGrid) {
  auto grid = spatial::cartesian_grid({{"beta", {1.5}}});
  auto r = spatial::tune_grid("g", grid, [](const spatial::GridPoint&) { return 3.0; });
  EXPECT_EQ(r.best.at("beta"), 1.5);
  EXPECT_TRUE(r.trace[0].chosen);
}

TEST(Tuning, TieBreaksBySmallerBetaThenRho) {
  auto grid = spatial::cartesian_grid({{"beta", {2.0, 1.0}}, {"rho", {1.0, 0.5}}});
  ASSERT_EQ(grid.size(), 4u);
  auto r = spatial::tune_grid("cd", grid, [](const spatial::GridPoint&) { return 1.0; });
  EXPECT_EQ(r.best.at("beta"), 1.0);
  EXPECT_EQ(r.best.at("rho"), 0.5);
}

TEST(Tuning, SelectsGeneratingParameters) {
  // Noiseless origin-constrained flows at beta = 1.5.
  std::mt19937_64 rng(12);
  auto imp = random_impedance(10, rng);
  std::vector<double> mv{2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  auto margins = flat_margins(std::vector<double>(10, 100.0), std::vector<double>(10, 100.0));
  spatial::ConstrainedSpec truth;
  truth.beta = 1.5;
  auto target = spatial::predict_constrained(truth, masses(mv), imp, margins).matrices.slices[0];
  auto grid = spatial::cartesian_grid({{"beta", {0.5, 1.0, 1.5, 2.0, 2.5}}});
  auto r = spatial::tune_grid("origin", grid, [&](const spatial::GridPoint& p) {
    spatial::ConstrainedSpec s;
    s.beta = p.at("beta");
    auto pred = spatial::predict_constrained(s, masses(mv), imp, margins).matrices.slices[0];
    double mae = 0;
    for (std::size_t k = 0; k < pred.size(); ++k) mae += std::abs(pred[k] - target[k]);
    return mae / pred.size();
  });
  EXPECT_EQ(r.best.at("beta"), 1.5);
}

TEST(Tuning, FailuresRecordedAndAllFailIsError) {
  auto grid = spatial::cartesian_grid({{"beta", {0.5, 1.0}}});
  auto r = spatial::tune_grid("g", grid, [](const spatial::GridPoint& p) {
    if (p.at("beta") == 0.5) throw FitError("bad");
    return 1.0;
  });
  EXPECT_EQ(r.best.at("beta"), 1.0);
  EXPECT_EQ(r.trace[0].error, "bad");
  EXPECT_THROW(spatial::tune_grid("g", grid, [](const spatial::GridPoint&) -> double { throw FitError("x"); }),
               FitError);
  auto j = spatial::to_json(r);
  EXPECT_EQ(j["trace"].size(), 2u);
  EXPECT_EQ(j["trace"][1]["chosen"], true);
}
