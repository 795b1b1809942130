#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/synthetic.hpp"
#include "ambit/util/error.hpp"

namespace ambit::spatial {

using od::DecayForm;

struct GravityParams {
  double k = 1.0;
  double alpha = 1.0;  // origin mass exponent
  double gamma = 1.0;  // destination mass exponent
  double beta = 0.0;   // decay
  DecayForm decay_form = DecayForm::power;

  void validate() const {
    if (!(k > 0)) throw ConfigError("gravity k must be positive");
    if (beta < 0) throw ConfigError("gravity beta must be >= 0");
  }
};

inline nlohmann::json to_json(const GravityParams& p) {
  return {{"k", p.k}, {"alpha", p.alpha}, {"gamma", p.gamma}, {"beta", p.beta},
          {"decay_form", od::to_string(p.decay_form)}};
}

inline double gravity_rate(const GravityParams& p, double m_o, double m_d, double d) {
  return p.k * std::pow(m_o, p.alpha) * std::pow(m_d, p.gamma) * od::decay(p.decay_form, p.beta, d);
}

inline std::vector<double> predict_gravity(const GravityParams& p, const od::MassVector& m_o,
                                           const od::MassVector& m_d,
                                           const od::ImpedanceMatrix& imp,
                                           std::span<const od::FlowRow> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out[i] = std::max(0.0, gravity_rate(p, m_o[r.origin], m_d[r.dest], imp(r.origin, r.dest)));
  }
  return out;
}

// Least squares with a named-column rank check; throws naming the first
// column that adds no rank to the ones before it.
inline Eigen::VectorXd ols_checked(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   std::span<const std::string> names) {
  Eigen::Index rank = 0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.leftCols(c + 1));
    qr.setThreshold(1e-10);
    if (qr.rank() <= rank)
      throw FitError("rank-deficient design: column '" + names[static_cast<std::size_t>(c)] +
                     "' is collinear with earlier columns");
    rank = qr.rank();
  }
  return X.colPivHouseholderQr().solve(y);
}

// log T = log k + alpha log m_o + gamma log m_d - beta log d over T > 0.
inline GravityParams fit_gravity_unconstrained(std::span<const od::FlowRow> train,
                                               const od::MassVector& m_o,
                                               const od::MassVector& m_d,
                                               const od::ImpedanceMatrix& imp) {
  std::size_t n = 0;
  for (const auto& r : train)
    if (r.flow > 0) ++n;
  if (n < 4) throw FitError("gravity fit needs at least 4 positive training flows");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  Eigen::Index i = 0;
  for (const auto& r : train) {
    if (r.flow <= 0) continue;
    X(i, 0) = 1.0;
    X(i, 1) = std::log(m_o[r.origin]);
    X(i, 2) = std::log(m_d[r.dest]);
    X(i, 3) = std::log(imp(r.origin, r.dest));
    y(i) = std::log(static_cast<double>(r.flow));
    ++i;
  }
  static const std::array<std::string, 4> names{"intercept", "log_m_o", "log_m_d", "log_d"};
  const Eigen::VectorXd b = ols_checked(X, y, names);
  GravityParams p;
  p.k = std::exp(b(0));
  p.alpha = b(1);
  p.gamma = b(2);
  p.beta = -b(3);
  p.decay_form = DecayForm::power;
  return p;
}

// One independent log-OLS fit per hour-of-day segment.
struct SegmentedGravity {
  std::array<GravityParams, 24> segments;
};

inline SegmentedGravity fit_gravity_segmented(std::span<const od::FlowRow> train,
                                              const od::MassVector& m_o,
                                              const od::MassVector& m_d,
                                              const od::ImpedanceMatrix& imp) {
  std::array<std::vector<od::FlowRow>, 24> by_hour;
  for (const auto& r : train) by_hour[static_cast<std::size_t>(od::hour_of_day(r.hour))].push_back(r);
  SegmentedGravity out;
  for (std::size_t h = 0; h < 24; ++h) {
    try {
      out.segments[h] = fit_gravity_unconstrained(by_hour[h], m_o, m_d, imp);
    } catch (const FitError& e) {
      throw FitError("hour-of-day segment " + std::to_string(h) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<double> predict_gravity_segmented(const SegmentedGravity& g,
                                                     const od::MassVector& m_o,
                                                     const od::MassVector& m_d,
                                                     const od::ImpedanceMatrix& imp,
                                                     std::span<const od::FlowRow> rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& p = g.segments[static_cast<std::size_t>(od::hour_of_day(r.hour))];
    out[i] = std::max(0.0, gravity_rate(p, m_o[r.origin], m_d[r.dest], imp(r.origin, r.dest)));
  }
  return out;
}

}  // namespace ambit::spatial
