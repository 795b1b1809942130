#pragma once

#include <chrono>
#include <cmath>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "ambit/util/error.hpp"
#include "ambit/util/stats.hpp"

namespace ambit::eval {

struct SeedStats {
  std::size_t n = 0;
  double mean = 0;
  double sd = 0;
  double half_width = 0;  // 0 with fewer than two seeds
  bool has_interval = false;
};

// Two-sided Student-t interval: t_{(1+c)/2, n-1} * sd / sqrt(n).
inline SeedStats aggregate_seed_stats(std::span<const double> values, double confidence = 0.95) {
  if (values.empty()) throw Error("seed aggregation needs at least one value");
  if (!(confidence > 0 && confidence < 1)) throw ConfigError("confidence must be in (0, 1)");
  SeedStats s;
  s.n = values.size();
  s.mean = ambit::mean(values);
  if (s.n < 2) return s;
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  const boost::math::students_t dist(static_cast<double>(s.n - 1));
  const double t = boost::math::quantile(dist, 0.5 * (1.0 + confidence));
  s.half_width = t * s.sd / std::sqrt(static_cast<double>(s.n));
  s.has_interval = true;
  return s;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Timing {
  double train_s = 0;
  double pred_s = 0;
};

}  // namespace ambit::eval
