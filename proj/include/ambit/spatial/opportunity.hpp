#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "ambit/od/impedance.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/spatial/constrained.hpp"
#include "ambit/util/error.hpp"

namespace ambit::spatial {

// s(i,j): total mass of zones k != i, j with d(i,k) < d(i,j).
struct OpportunityField {
  std::size_t n = 0;
  std::vector<double> s;  // n*n row-major
  double L = 0.0;

  double operator()(std::size_t i, std::size_t j) const { return s[i * n + j]; }
};

inline OpportunityField build_opportunity_field(const od::MassVector& mass,
                                                const od::ImpedanceMatrix& imp) {
  const std::size_t n = imp.n;
  if (mass.size() != n) throw Error("opportunity field size mismatch");
  OpportunityField f;
  f.n = n;
  f.s.assign(n * n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return imp(i, a) < imp(i, b); });
    // Walk groups of equal distance; each group sees the mass of strictly
    // closer zones, minus i itself when i lies in that closer set.
    double closer = 0.0;
    std::size_t g = 0;
    while (g < n) {
      std::size_t e = g;
      const double dg = imp(i, order[g]);
      while (e < n && imp(i, order[e]) == dg) ++e;
      for (std::size_t t = g; t < e; ++t) f.s[i * n + order[t]] = closer;
      for (std::size_t t = g; t < e; ++t)
        if (order[t] != i) closer += mass[order[t]];
      g = e;
    }
  }
  return f;
}

inline double radiation_share(double m_i, double m_j, double s) {
  return m_i * m_j / ((m_i + s) * (m_i + m_j + s));
}

// T_ij = O_i * m_i m_j / ((m_i + s_ij)(m_i + m_j + s_ij)), diagonal zero.
inline SliceMatrices predict_radiation(const od::MassVector& mass, const OpportunityField& opp,
                                       std::span<const double> outflow) {
  const std::size_t n = opp.n;
  SliceMatrices out;
  out.n = n;
  out.slices.assign(1, std::vector<double>(n * n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.slices[0][i * n + j] = outflow[i] * radiation_share(mass[i], mass[j], opp(i, j));
  return out;
}

enum class OpportunityVariant { intervening, ops };

// Normalised over destinations so each origin distributes exactly O_i.
inline SliceMatrices predict_opportunity_model(OpportunityVariant variant,
                                               const OpportunityField& opp,
                                               const od::MassVector& mass,
                                               std::span<const double> outflow, double L) {
  const std::size_t n = opp.n;
  if (variant == OpportunityVariant::intervening && !(L > 0))
    throw ConfigError("intervening-opportunity L must be positive");
  SliceMatrices out;
  out.n = n;
  out.slices.assign(1, std::vector<double>(n * n, 0.0));
  auto& m = out.slices[0];
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        w[j] = 0.0;
        continue;
      }
      const double s = opp(i, j);
      if (variant == OpportunityVariant::intervening)
        w[j] = std::exp(-L * s) * -std::expm1(-L * mass[j]);
      else
        w[j] = mass[j] / (mass[i] + s + mass[j]);
      total += w[j];
    }
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = total > 0 ? outflow[i] * w[j] / total : 0.0;
  }
  return out;
}

// Candidate absorption rates scaled to the total mass of the field.
inline std::vector<double> opportunity_l_grid(const od::MassVector& mass) {
  const double total = std::accumulate(mass.m.begin(), mass.m.end(), 0.0);
  std::vector<double> grid;
  for (double c : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) grid.push_back(c / total);
  return grid;
}

}  // namespace ambit::spatial
