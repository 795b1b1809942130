#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/synthetic.hpp"
#include "ambit/od/time.hpp"
#include "ambit/spatial/gravity.hpp"
#include "ambit/spatial/ipf.hpp"

namespace ambit::spatial {

inline constexpr std::size_t kSlices = 24;

// Mean hourly margins per (hour-of-day slice, zone) over the training window.
struct HourlyMargins {
  std::size_t n = 0;
  std::array<std::vector<double>, kSlices> O;
  std::array<std::vector<double>, kSlices> D;
};

// `rows` should be the full (unfiltered) flow table; only hours in
// [train_start, train_end) contribute. Each slice is divided by the number of
// calendar hours of that slice inside the window.
inline HourlyMargins compute_hourly_margins(std::span<const od::FlowRow> rows, std::size_t n,
                                            od::HourStamp train_start, od::HourStamp train_end) {
  HourlyMargins m;
  m.n = n;
  std::array<double, kSlices> hours{};
  for (od::HourStamp h = train_start; h < train_end; ++h)
    hours[static_cast<std::size_t>(od::hour_of_day(h))] += 1.0;
  for (std::size_t s = 0; s < kSlices; ++s) {
    m.O[s].assign(n, 0.0);
    m.D[s].assign(n, 0.0);
  }
  for (const auto& r : rows) {
    if (r.hour < train_start || r.hour >= train_end) continue;
    const auto s = static_cast<std::size_t>(od::hour_of_day(r.hour));
    m.O[s][r.origin] += static_cast<double>(r.flow);
    m.D[s][r.dest] += static_cast<double>(r.flow);
  }
  for (std::size_t s = 0; s < kSlices; ++s) {
    if (hours[s] == 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      m.O[s][i] /= hours[s];
      m.D[s][i] /= hours[s];
    }
  }
  return m;
}

// Mean hourly training outflow per zone (no slicing).
inline std::vector<double> mean_hourly_outflow(std::span<const od::FlowRow> rows, std::size_t n,
                                               od::HourStamp train_start,
                                               od::HourStamp train_end) {
  std::vector<double> out(n, 0.0);
  for (const auto& r : rows)
    if (r.hour >= train_start && r.hour < train_end) out[r.origin] += static_cast<double>(r.flow);
  const double hours = static_cast<double>(std::max<od::HourStamp>(1, train_end - train_start));
  for (auto& v : out) v /= hours;
  return out;
}

// Full-matrix predictions, either static (one slice) or per hour of day.
struct SliceMatrices {
  std::size_t n = 0;
  std::vector<std::vector<double>> slices;  // each n*n row-major

  double at(std::size_t slice, std::size_t o, std::size_t d) const {
    const auto& m = slices.size() == 1 ? slices[0] : slices[slice];
    return m[o * n + d];
  }

  std::vector<double> predict(std::span<const od::FlowRow> rows) const {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      out[i] = at(static_cast<std::size_t>(od::hour_of_day(r.hour)), r.origin, r.dest);
    }
    return out;
  }
};

enum class ConstrainedVariant { origin, destination, doubly };

struct ConstrainedSpec {
  ConstrainedVariant variant = ConstrainedVariant::origin;
  DecayForm decay_form = DecayForm::power;
  double beta = 1.0;
  double mass_exponent = 1.0;  // gamma on destinations / alpha on origins
  bool include_diagonal = false;
};

struct ConstrainedFit {
  ConstrainedSpec spec;
  SliceMatrices matrices;
  std::array<bool, kSlices> converged{};
  std::array<int, kSlices> iterations{};
};

namespace detail {

inline std::vector<double> decay_matrix(const od::ImpedanceMatrix& imp, DecayForm form,
                                        double beta, bool include_diagonal) {
  std::vector<double> f(imp.n * imp.n);
  for (std::size_t i = 0; i < imp.n; ++i)
    for (std::size_t j = 0; j < imp.n; ++j)
      f[i * imp.n + j] = (i == j && !include_diagonal) ? 0.0 : od::decay(form, beta, imp(i, j));
  return f;
}

// Rows of `w` normalised to shares, then scaled by per-slice origin margins.
inline SliceMatrices allocate_by_origin(const std::vector<double>& w, std::size_t n,
                                        const HourlyMargins& margins) {
  std::vector<double> share = w;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += share[i * n + j];
    for (std::size_t j = 0; j < n; ++j) share[i * n + j] = s > 0 ? share[i * n + j] / s : 0.0;
  }
  SliceMatrices out;
  out.n = n;
  out.slices.resize(kSlices);
  for (std::size_t s = 0; s < kSlices; ++s) {
    auto& m = out.slices[s];
    m.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] = margins.O[s][i] * share[i * n + j];
  }
  return out;
}

}  // namespace detail

// Origin-, destination- or doubly-constrained gravity over the full zone
// set. `attraction` is the destination mass (origin/doubly) or the origin
// mass (destination variant); the doubly constrained model ignores it.
inline ConstrainedFit predict_constrained(const ConstrainedSpec& spec,
                                          const od::MassVector& attraction,
                                          const od::ImpedanceMatrix& imp,
                                          const HourlyMargins& margins) {
  const std::size_t n = imp.n;
  if (margins.n != n || attraction.size() != n) throw Error("constrained model size mismatch");
  ConstrainedFit fit;
  fit.spec = spec;
  fit.converged.fill(true);
  const auto f = detail::decay_matrix(imp, spec.decay_form, spec.beta, spec.include_diagonal);

  if (spec.variant == ConstrainedVariant::origin) {
    std::vector<double> w(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        w[i * n + j] = std::pow(attraction[j], spec.mass_exponent) * f[i * n + j];
    fit.matrices = detail::allocate_by_origin(w, n, margins);
    return fit;
  }

  fit.matrices.n = n;
  fit.matrices.slices.resize(kSlices);
  if (spec.variant == ConstrainedVariant::destination) {
    std::vector<double> share(n * n);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += std::pow(attraction[i], spec.mass_exponent) * f[i * n + j];
      for (std::size_t i = 0; i < n; ++i)
        share[i * n + j] = s > 0 ? std::pow(attraction[i], spec.mass_exponent) * f[i * n + j] / s : 0.0;
    }
    for (std::size_t s = 0; s < kSlices; ++s) {
      auto& m = fit.matrices.slices[s];
      m.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] = margins.D[s][j] * share[i * n + j];
    }
    return fit;
  }

  Eigen::MatrixXd seed(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      seed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[i * n + j];
  for (std::size_t s = 0; s < kSlices; ++s) {
    const auto cal = calibrate_ipf(seed, margins.O[s], margins.D[s]);
    fit.converged[s] = cal.converged;
    fit.iterations[s] = cal.iterations;
    const Eigen::MatrixXd t = cal.apply(seed);
    auto& m = fit.matrices.slices[s];
    m.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m[i * n + j] = t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return fit;
}

struct CompetingDestParams {
  GravityParams base;  // uses beta, gamma and decay_form
  double rho = 1.0;    // competition exponent
  double delta = 1.0;  // accessibility decay
};

inline std::vector<double> accessibility(const od::MassVector& mass,
                                         const od::ImpedanceMatrix& imp, double delta) {
  const std::size_t n = imp.n;
  std::vector<double> a(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) a[j] += mass[k] / std::pow(imp(j, k), delta);
  return a;
}

// Origin-constrained allocation with destination attractiveness
// m_j^gamma * A_j^rho, A_j = sum_{k != j} m_k / d_jk^delta.
inline ConstrainedFit predict_competing_destinations(const CompetingDestParams& p,
                                                     const od::MassVector& mass,
                                                     const od::ImpedanceMatrix& imp,
                                                     const HourlyMargins& margins,
                                                     bool include_diagonal = false) {
  const std::size_t n = imp.n;
  if (n < 2) throw Error("competing destinations needs at least 2 zones");
  const auto acc = accessibility(mass, imp, p.delta);
  const auto f = detail::decay_matrix(imp, p.base.decay_form, p.base.beta, include_diagonal);
  std::vector<double> w(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      w[i * n + j] = std::pow(mass[j], p.base.gamma) * std::pow(acc[j], p.rho) * f[i * n + j];
  ConstrainedFit fit;
  fit.spec = {ConstrainedVariant::origin, p.base.decay_form, p.base.beta, p.base.gamma,
              include_diagonal};
  fit.converged.fill(true);
  fit.matrices = detail::allocate_by_origin(w, n, margins);
  return fit;
}

}  // namespace ambit::spatial
