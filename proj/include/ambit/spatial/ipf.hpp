#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ambit/util/error.hpp"

namespace ambit::spatial {

inline constexpr double kIpfTolerance = 1e-6;
inline constexpr int kIpfMaxIter = 500;

// Result of balancing T_ij = A_i * seed_ij * B_j to the margins. Zones with
// a zero margin get a zero balancing factor; all others are positive.
struct MarginCalibration {
  std::vector<double> O;  // origin margins
  std::vector<double> D;  // destination margins after rescaling to sum(O)
  std::vector<double> A;
  std::vector<double> B;
  bool converged = false;
  int iterations = 0;
  double max_relative_error = 0;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& seed) const {
    Eigen::MatrixXd t = seed;
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j)
        t(i, j) *= A[static_cast<std::size_t>(i)] * B[static_cast<std::size_t>(j)];
    return t;
  }
};

inline double max_margin_error(const Eigen::MatrixXd& t, std::span<const double> O,
                               std::span<const double> D) {
  double err = 0;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    const double target = O[static_cast<std::size_t>(i)];
    const double s = t.row(i).sum();
    err = std::max(err, target > 0 ? std::abs(s - target) / target : std::abs(s));
  }
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    const double target = D[static_cast<std::size_t>(j)];
    const double s = t.col(j).sum();
    err = std::max(err, target > 0 ? std::abs(s - target) / target : std::abs(s));
  }
  return err;
}

// Alternating row/column scaling until the max relative margin error drops
// below tol. Structural zeros that make the margins infeasible leave
// converged == false.
inline MarginCalibration calibrate_ipf(const Eigen::MatrixXd& seed, std::span<const double> O,
                                       std::span<const double> D, double tol = kIpfTolerance,
                                       int max_iter = kIpfMaxIter) {
  const auto n = static_cast<std::size_t>(seed.rows());
  const auto m = static_cast<std::size_t>(seed.cols());
  if (O.size() != n || D.size() != m) throw Error("IPF margin sizes do not match seed");
  if ((seed.array() < 0).any()) throw Error("IPF seed must be non-negative");
  for (double v : O)
    if (!(v >= 0)) throw Error("IPF origin margins must be non-negative");
  for (double v : D)
    if (!(v >= 0)) throw Error("IPF destination margins must be non-negative");

  MarginCalibration cal;
  cal.O.assign(O.begin(), O.end());
  cal.D.assign(D.begin(), D.end());
  const double so = std::accumulate(cal.O.begin(), cal.O.end(), 0.0);
  const double sd = std::accumulate(cal.D.begin(), cal.D.end(), 0.0);
  if (sd > 0 && so != sd)
    for (auto& v : cal.D) v *= so / sd;
  cal.A.assign(n, 0.0);
  cal.B.assign(m, 1.0);
  for (std::size_t j = 0; j < m; ++j)
    if (cal.D[j] == 0) cal.B[j] = 0;

  std::vector<double> colsum(m);
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < m; ++j)
        s += seed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * cal.B[j];
      cal.A[i] = (cal.O[i] > 0 && s > 0) ? cal.O[i] / s : 0.0;
    }
    std::fill(colsum.begin(), colsum.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (cal.A[i] == 0) continue;
      for (std::size_t j = 0; j < m; ++j)
        colsum[j] += cal.A[i] * seed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < m; ++j)
      cal.B[j] = (cal.D[j] > 0 && colsum[j] > 0) ? cal.D[j] / colsum[j] : 0.0;
    cal.iterations = it;
    double err = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double got = cal.B[j] * colsum[j];
      err = std::max(err, cal.D[j] > 0 ? std::abs(got - cal.D[j]) / cal.D[j] : got);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < m; ++j)
        s += seed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * cal.B[j];
      const double got = cal.A[i] * s;
      err = std::max(err, cal.O[i] > 0 ? std::abs(got - cal.O[i]) / cal.O[i] : got);
    }
    cal.max_relative_error = err;
    if (cal.max_relative_error < tol) {
      cal.converged = true;
      break;
    }
  }
  return cal;
}

}  // namespace ambit::spatial
