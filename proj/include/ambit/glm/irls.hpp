#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include "ambit/glm/design.hpp"
#include "ambit/util/error.hpp"

namespace ambit::glm {

inline constexpr double kIrlsTolerance = 1e-8;
inline constexpr int kIrlsMaxIter = 100;
inline constexpr double kFeRidge = 1e-8;
inline constexpr double kMaxEta = 700.0;

enum class Family { poisson, negbin, zip };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::poisson: return "poisson";
    case Family::negbin: return "negbin";
    case Family::zip: return "zip";
  }
  return "?";
}

struct GlmFit {
  Family family = Family::poisson;
  std::vector<std::string> columns;
  std::vector<double> coefficients;
  double dispersion = 0.0;  // negbin a in Var = mu + a mu^2
  double inflation = 0.0;   // zip p
  bool clamped = false;     // dispersion or inflation hit a bound
  std::vector<double> deviance_trace;
  bool converged = false;
  int iterations = 0;
  double ridge = 0.0;
  double max_score = 0.0;

  double coef(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return coefficients[i];
    throw Error("no coefficient named '" + name + "'");
  }
};

struct IrlsOptions {
  double tol = kIrlsTolerance;
  int max_iter = kIrlsMaxIter;
  double ridge = 0.0;
  double nb_dispersion = 0.0;
  std::optional<std::vector<double>> start;
};

namespace detail {

inline double clamp_eta(double e) { return std::min(e, kMaxEta); }

inline double unit_deviance(double y, double mu, double a) {
  const double ylogy = y > 0 ? y * std::log(y / mu) : 0.0;
  if (a <= 0) return 2.0 * (ylogy - (y - mu));
  return 2.0 * (ylogy - (y + 1.0 / a) * std::log((1.0 + a * y) / (1.0 + a * mu)));
}

inline Eigen::VectorXd solve_normal(const SparseMatrix& A, const Eigen::VectorXd& b) {
  if (A.cols() <= 64) {
    const Eigen::MatrixXd dense(A);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
    if (ldlt.info() != Eigen::Success) throw FitError("normal equations not factorizable");
    return ldlt.solve(b);
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw FitError("sparse normal equations not factorizable");
  return ldlt.solve(b);
}

}  // namespace detail

inline std::vector<double> design_weights(const GlmDesign& d) {
  if (d.row_weights.empty()) return std::vector<double>(d.rows(), 1.0);
  if (d.row_weights.size() != d.rows()) throw Error("row weight count mismatch");
  return d.row_weights;
}

// Poisson log-likelihood (without the log y! constant) and its gradient.
inline double poisson_loglik(const GlmDesign& d, std::span<const double> y,
                             const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = d.X * beta;
  const auto w = design_weights(d);
  double ll = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += w[static_cast<std::size_t>(i)] *
          (y[static_cast<std::size_t>(i)] * eta(i) - std::exp(detail::clamp_eta(eta(i))));
  return ll;
}

inline Eigen::VectorXd poisson_score(const GlmDesign& d, std::span<const double> y,
                                     const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = d.X * beta;
  const auto w = design_weights(d);
  Eigen::VectorXd r(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    r(i) = w[static_cast<std::size_t>(i)] *
           (y[static_cast<std::size_t>(i)] - std::exp(detail::clamp_eta(eta(i))));
  return d.X.transpose() * r;
}

// Log-link IRLS with step halving; Poisson when nb_dispersion is 0.
inline GlmFit fit_irls(const GlmDesign& d, std::span<const double> y, const IrlsOptions& opt) {
  const std::size_t n = d.rows(), p = d.cols();
  if (y.size() != n) throw Error("response length does not match design rows");
  if (n == 0 || p == 0) throw FitError("empty design");
  for (double v : y)
    if (!(v >= 0) || !std::isfinite(v)) throw Error("counts must be finite and non-negative");
  for (Eigen::Index c = 0; c < d.X.outerSize(); ++c)
    if (d.X.col(c).norm() == 0)
      throw FitError("design column '" + d.columns[static_cast<std::size_t>(c)] + "' is all zero");
  const auto pw = design_weights(d);
  const double a = opt.nb_dispersion;

  GlmFit fit;
  fit.family = a > 0 ? Family::negbin : Family::poisson;
  fit.dispersion = a;
  fit.columns = d.columns;
  fit.ridge = opt.ridge;

  Eigen::VectorXd ridge_diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  if (opt.ridge > 0)
    for (std::size_t j = 0; j < p; ++j)
      if (j < d.penalized.size() && d.penalized[j]) ridge_diag(static_cast<Eigen::Index>(j)) = opt.ridge;

  Eigen::VectorXd eta(static_cast<Eigen::Index>(n)), mu(static_cast<Eigen::Index>(n));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  bool have_beta = false;
  if (opt.start) {
    if (opt.start->size() != p) throw Error("start vector length mismatch");
    beta = Eigen::Map<const Eigen::VectorXd>(opt.start->data(), static_cast<Eigen::Index>(p));
    eta = d.X * beta;
    have_beta = true;
  } else {
    for (std::size_t i = 0; i < n; ++i) eta(static_cast<Eigen::Index>(i)) = std::log(y[i] + 0.5);
  }
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = std::exp(detail::clamp_eta(eta(i)));

  auto objective = [&](const Eigen::VectorXd& m, const Eigen::VectorXd& b, double& dev) {
    dev = 0;
    for (std::size_t i = 0; i < n; ++i)
      dev += pw[i] * detail::unit_deviance(y[i], m(static_cast<Eigen::Index>(i)), a);
    return dev + (ridge_diag.array() * b.array().square()).sum();
  };
  double dev_prev = 0;
  double obj_prev = have_beta ? objective(mu, beta, dev_prev) : 0.0;

  Eigen::VectorXd w(static_cast<Eigen::Index>(n)), z(static_cast<Eigen::Index>(n));
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      w(k) = pw[i] * mu(k) / (1.0 + a * mu(k));
      z(k) = eta(k) + (y[i] - mu(k)) / mu(k);
    }
    SparseMatrix Xw = w.asDiagonal() * d.X;
    SparseMatrix A = SparseMatrix(d.X.transpose()) * Xw;
    for (std::size_t j = 0; j < p; ++j)
      if (ridge_diag(static_cast<Eigen::Index>(j)) > 0)
        A.coeffRef(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) +=
            ridge_diag(static_cast<Eigen::Index>(j));
    const Eigen::VectorXd rhs = Xw.transpose() * z;
    Eigen::VectorXd cand = detail::solve_normal(A, rhs);

    double dev = 0, obj = 0;
    Eigen::VectorXd eta_c, mu_c(static_cast<Eigen::Index>(n));
    for (int half = 0;; ++half) {
      eta_c = d.X * cand;
      for (Eigen::Index i = 0; i < eta_c.size(); ++i) mu_c(i) = std::exp(detail::clamp_eta(eta_c(i)));
      obj = objective(mu_c, cand, dev);
      const bool ok = std::isfinite(obj) && (!have_beta || obj <= obj_prev + 1e-10 * (1.0 + std::abs(obj_prev)));
      if (ok) break;
      if (!have_beta || half >= 40) {
        if (!std::isfinite(obj))
          throw FitError("IRLS diverged at iteration " + std::to_string(it) +
                         " (deviance not finite, last deviance " + std::to_string(dev_prev) + ")");
        break;
      }
      cand = 0.5 * (beta + cand);
    }
    const bool stalled = have_beta && (cand - beta).cwiseAbs().maxCoeff() == 0.0;
    beta = cand;
    eta = eta_c;
    mu = mu_c;
    have_beta = true;
    dev_prev = dev;
    obj_prev = obj;
    fit.deviance_trace.push_back(dev);
    fit.iterations = it;

    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      resid(k) = pw[i] * (y[i] - mu(k)) / (1.0 + a * mu(k));
    }
    const Eigen::VectorXd score = d.X.transpose() * resid - (ridge_diag.array() * beta.array()).matrix();
    fit.max_score = score.cwiseAbs().maxCoeff();
    if (fit.max_score < opt.tol * static_cast<double>(n)) {
      fit.converged = true;
      break;
    }
    if (stalled) break;
  }
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  return fit;
}

inline GlmFit fit_ppml(const GlmDesign& d, std::span<const double> y, double tol = kIrlsTolerance,
                       int max_iter = kIrlsMaxIter) {
  IrlsOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.ridge = d.sparse ? kFeRidge : 0.0;
  return fit_irls(d, y, opt);
}

inline Eigen::VectorXd linear_predictor(const GlmFit& fit, const GlmDesign& d) {
  if (fit.columns != d.columns) throw Error("design columns do not match the fitted model");
  const Eigen::Map<const Eigen::VectorXd> b(fit.coefficients.data(),
                                            static_cast<Eigen::Index>(fit.coefficients.size()));
  return d.X * b;
}

inline std::vector<double> predict_glm(const GlmFit& fit, const GlmDesign& d) {
  const Eigen::VectorXd eta = linear_predictor(fit, d);
  const double scale = fit.family == Family::zip ? 1.0 - fit.inflation : 1.0;
  std::vector<double> out(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    out[static_cast<std::size_t>(i)] = scale * std::exp(detail::clamp_eta(eta(i)));
  return out;
}

inline nlohmann::json to_json(const GlmFit& f) {
  nlohmann::json coef = nlohmann::json::object();
  for (std::size_t i = 0; i < f.columns.size(); ++i) coef[f.columns[i]] = f.coefficients[i];
  return {{"family", to_string(f.family)},
          {"columns", f.columns},
          {"coefficients", coef},
          {"dispersion", f.dispersion},
          {"inflation", f.inflation},
          {"clamped", f.clamped},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"ridge", f.ridge},
          {"max_score", f.max_score},
          {"deviance_trace", f.deviance_trace}};
}

inline GlmFit glm_from_json(const nlohmann::json& j) {
  GlmFit f;
  const auto fam = j.at("family").get<std::string>();
  f.family = fam == "negbin" ? Family::negbin : fam == "zip" ? Family::zip : Family::poisson;
  f.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& c : f.columns) f.coefficients.push_back(j.at("coefficients").at(c).get<double>());
  f.dispersion = j.value("dispersion", 0.0);
  f.inflation = j.value("inflation", 0.0);
  f.clamped = j.value("clamped", false);
  f.converged = j.value("converged", false);
  f.iterations = j.value("iterations", 0);
  f.ridge = j.value("ridge", 0.0);
  f.max_score = j.value("max_score", 0.0);
  f.deviance_trace = j.value("deviance_trace", std::vector<double>{});
  return f;
}

}  // namespace ambit::glm
