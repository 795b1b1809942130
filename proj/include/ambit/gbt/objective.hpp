#pragma once

#include <cmath>
#include <span>
#include <string>

#include "ambit/util/error.hpp"

namespace ambit::gbt {

enum class Objective { squared, poisson, tweedie };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::squared: return "squared";
    case Objective::poisson: return "poisson";
    case Objective::tweedie: return "tweedie";
  }
  return "?";
}

inline Objective objective_from_string(const std::string& s) {
  if (s == "squared" || s == "reg:squarederror") return Objective::squared;
  if (s == "poisson" || s == "count:poisson") return Objective::poisson;
  if (s == "tweedie" || s == "reg:tweedie") return Objective::tweedie;
  throw ConfigError("unknown objective '" + s + "'");
}

inline bool uses_log_link(Objective o) { return o != Objective::squared; }

struct GradHess {
  double g = 0;
  double h = 0;
};

// Per-row loss in link space F (up to terms constant in F).
//   squared: (y - F)^2 / 2
//   poisson: exp(F) - y F
//   tweedie: -y exp((1-p)F)/(1-p) + exp((2-p)F)/(2-p)
inline double loss(Objective o, double y, double F, double p = 1.5) {
  switch (o) {
    case Objective::squared: return 0.5 * (y - F) * (y - F);
    case Objective::poisson: return std::exp(F) - y * F;
    case Objective::tweedie:
      return -y * std::exp((1 - p) * F) / (1 - p) + std::exp((2 - p) * F) / (2 - p);
  }
  return 0;
}

inline GradHess grad_hess(Objective o, double y, double F, double p = 1.5) {
  switch (o) {
    case Objective::squared: return {F - y, 1.0};
    case Objective::poisson: {
      const double e = std::exp(F);
      return {e - y, e};
    }
    case Objective::tweedie: {
      const double a = std::exp((1 - p) * F), b = std::exp((2 - p) * F);
      return {-y * a + b, -y * (1 - p) * a + (2 - p) * b};
    }
  }
  return {};
}

inline double mean_loss(Objective o, std::span<const double> y, std::span<const double> F,
                        double p = 1.5) {
  if (y.empty()) return 0.0;
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += loss(o, y[i], F[i], p);
  return s / static_cast<double>(y.size());
}

inline double inverse_link(Objective o, double F) { return uses_log_link(o) ? std::exp(F) : F; }

}  // namespace ambit::gbt
