#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/ingest.hpp"
#include "ambit/od/time.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/random.hpp"

namespace ambit::od {

enum class DecayForm { power, exponential };

inline const char* to_string(DecayForm f) {
  return f == DecayForm::power ? "power" : "exponential";
}

inline double decay(DecayForm form, double beta, double d) {
  return form == DecayForm::power ? std::pow(d, -beta) : std::exp(-beta * d);
}

// Generative process for a desk-scale city:
//   T ~ Poisson(k * m_o^alpha * m_d^gamma * f(d) * g(hour) * h(o, d, hour))
// with m = POI total + 1, optional per-origin multipliers folded into h and
// optional structural zeros.
struct SyntheticConfig {
  int n_zones = 30;
  int n_hours = 24 * 7 * 8;
  HourStamp start = make_hour(2025, 1, 6);
  double side_km = 20.0;
  int n_boroughs = 4;
  double k = 0.0;             // <= 0: chosen so the mean cell rate equals target_mean
  double target_mean = 3.0;
  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 1.5;
  DecayForm decay_form = DecayForm::power;
  double temporal_amplitude = 0.0;  // 0: g == 1
  double poi_effect = 0.0;          // 0: POI/hour multiplier off
  double origin_effect_sd = 0.0;    // 0: no per-origin multipliers
  double zero_inflation = 0.0;      // structural-zero probability per cell
  double poi_log_mean = 4.0;
  double poi_log_sd = 1.0;
  bool intrazonal = false;
  std::uint64_t seed = 42;

  void validate() const {
    if (n_zones < 2) throw ConfigError("synthetic city needs n_zones >= 2");
    if (n_hours < 1) throw ConfigError("synthetic city needs n_hours >= 1");
    if (!(side_km > 0)) throw ConfigError("side_km must be positive");
    if (n_boroughs < 1) throw ConfigError("n_boroughs must be >= 1");
    if (!(k > 0) && !(target_mean > 0)) throw ConfigError("need k > 0 or target_mean > 0");
    if (beta < 0) throw ConfigError("beta must be >= 0");
    if (zero_inflation < 0 || zero_inflation >= 1)
      throw ConfigError("zero_inflation must lie in [0, 1)");
    if (origin_effect_sd < 0 || poi_log_sd < 0 || temporal_amplitude < 0)
      throw ConfigError("spread parameters must be >= 0");
  }
};

struct SyntheticCity {
  ZoneTable zones;
  FlowTable flows;
  nlohmann::json manifest;
  double k = 0;
  std::vector<double> mass;            // generator mass per zone
  std::vector<double> origin_effect;   // log multiplier per origin
  std::array<double, 168> temporal{};  // g by hour of week
};

namespace detail {

inline double bump(double hod, double centre, double width) {
  const double x = hod - centre;
  return std::exp(-x * x / (2 * width * width));
}

// Weekday commute peaks, weekend midday plateau; normalised to mean 1.
inline std::array<double, 168> temporal_profile(double amplitude) {
  std::array<double, 168> g{};
  double sum = 0;
  for (int how = 0; how < 168; ++how) {
    const int dow = how / 24;
    const double hod = how % 24;
    double p = 0;
    if (dow < 5)
      p = bump(hod, 8, 1.5) + bump(hod, 18, 2.0) - 0.9 * bump(hod, 3.5, 2.0);
    else
      p = 0.7 * bump(hod, 14, 3.0) - 0.9 * bump(hod, 5, 2.0);
    g[how] = std::exp(amplitude * p);
    sum += g[how];
  }
  for (auto& v : g) v *= 168.0 / sum;
  return g;
}

// POI-mix driven log multiplier: office-heavy destinations draw the morning
// peak, amenity-heavy destinations the evening, dense origins emit more.
struct PoiMultiplier {
  std::vector<double> office_share, amenity_share, density_z;
  double mean_office = 0, mean_amenity = 0;

  explicit PoiMultiplier(const ZoneTable& zones) {
    const std::size_t n = zones.size();
    office_share.resize(n);
    amenity_share.resize(n);
    density_z.resize(n);
    double mean_ld = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double tot = std::max<double>(1, static_cast<double>(zones[i].poi_total()));
      office_share[i] = static_cast<double>(zones[i].poi_count(PoiCategory::office)) / tot;
      amenity_share[i] = static_cast<double>(zones[i].poi_count(PoiCategory::amenity)) / tot;
      density_z[i] = std::log1p(zones[i].poi_total_density());
      mean_office += office_share[i] / n;
      mean_amenity += amenity_share[i] / n;
      mean_ld += density_z[i] / n;
    }
    double var = 0;
    for (auto v : density_z) var += (v - mean_ld) * (v - mean_ld) / n;
    const double sd = var > 0 ? std::sqrt(var) : 1.0;
    for (auto& v : density_z) v = (v - mean_ld) / sd;
  }

  double log_h(std::size_t o, std::size_t d, int how) const {
    const double hod = how % 24;
    const bool weekday = how / 24 < 5;
    const double am = weekday ? bump(hod, 8, 1.5) : 0.0;
    const double eve = bump(hod, 20, 2.5);
    return 4.0 * (office_share[d] - mean_office) * am +
           4.0 * (amenity_share[d] - mean_amenity) * eve + 0.3 * density_z[o];
  }
};

}  // namespace detail

inline SyntheticCity generate_synthetic_city(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 1));
  const auto n = static_cast<std::size_t>(cfg.n_zones);

  std::lognormal_distribution<double> poi_draw(cfg.poi_log_mean, cfg.poi_log_sd);
  std::vector<Zone> zv(n);
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n_boroughs))));
  for (std::size_t i = 0; i < n; ++i) {
    Zone& z = zv[i];
    z.id = static_cast<int>(i) + 1;
    z.x_m = uniform01(rng) * cfg.side_km * 1000.0;
    z.y_m = uniform01(rng) * cfg.side_km * 1000.0;
    z.area_km2 = 0.5 + 3.5 * uniform01(rng);
    const int gx = std::min(grid - 1, static_cast<int>(z.x_m / (cfg.side_km * 1000.0) * grid));
    const int gy = std::min(grid - 1, static_cast<int>(z.y_m / (cfg.side_km * 1000.0) * grid));
    const int b = std::min(cfg.n_boroughs - 1, gy * grid + gx);
    z.borough = std::string("Borough ") + static_cast<char>('A' + b);
    for (auto& c : z.poi) c = static_cast<std::int64_t>(std::floor(poi_draw(rng)));
  }
  SyntheticCity city;
  city.zones = ZoneTable(std::move(zv));
  const auto imp = euclidean_impedance(city.zones);

  city.mass.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    city.mass[i] = static_cast<double>(city.zones[i].poi_total()) + 1.0;
  city.origin_effect.assign(n, 0.0);
  if (cfg.origin_effect_sd > 0) {
    std::normal_distribution<double> nd(0.0, cfg.origin_effect_sd);
    double m = 0;
    for (auto& u : city.origin_effect) {
      u = nd(rng);
      m += u / n;
    }
    for (auto& u : city.origin_effect) u -= m;
  }
  city.temporal = detail::temporal_profile(cfg.temporal_amplitude);
  const detail::PoiMultiplier poi(city.zones);

  // Static part of the rate per pair.
  std::vector<double> base(n * n, 0.0);
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t d = 0; d < n; ++d) {
      if (o == d && !cfg.intrazonal) continue;
      base[o * n + d] = std::pow(city.mass[o], cfg.alpha) * std::pow(city.mass[d], cfg.gamma) *
                        decay(cfg.decay_form, cfg.beta, imp(o, d)) *
                        std::exp(city.origin_effect[o]);
    }
  auto hourly_factor = [&](std::size_t o, std::size_t d, HourStamp h) {
    const int how = temporal_features(h).hour_of_week;
    double f = city.temporal[how];
    if (cfg.poi_effect != 0) f *= std::exp(cfg.poi_effect * poi.log_h(o, d, how));
    return f;
  };

  city.k = cfg.k;
  if (!(city.k > 0)) {
    // Mean over one full week of hour-of-week slots.
    double sum = 0;
    std::size_t cells = 0;
    for (int how = 0; how < 168; ++how) {
      const HourStamp h = cfg.start + how;
      for (std::size_t o = 0; o < n; ++o)
        for (std::size_t d = 0; d < n; ++d) {
          if (o == d && !cfg.intrazonal) continue;
          sum += base[o * n + d] * hourly_factor(o, d, h);
          ++cells;
        }
    }
    city.k = cfg.target_mean * static_cast<double>(cells) / sum;
  }

  std::vector<FlowRow> rows;
  Rng draw(derive_seed(cfg.seed, 2));
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t d = 0; d < n; ++d) {
      if (o == d && !cfg.intrazonal) continue;
      for (int t = 0; t < cfg.n_hours; ++t) {
        const HourStamp h = cfg.start + t;
        const double rate = city.k * base[o * n + d] * hourly_factor(o, d, h);
        if (cfg.zero_inflation > 0 && uniform01(draw) < cfg.zero_inflation) continue;
        std::poisson_distribution<std::int64_t> pd(rate);
        const auto y = rate > 0 ? pd(draw) : 0;
        if (y > 0)
          rows.push_back({static_cast<ZoneIndex>(o), static_cast<ZoneIndex>(d), h, y});
      }
    }
  city.flows = FlowTable(std::move(rows));

  auto& m = city.manifest;
  m["generator"] = "poisson_gravity";
  m["seed"] = cfg.seed;
  m["n_zones"] = cfg.n_zones;
  m["n_hours"] = cfg.n_hours;
  m["start"] = format_hour(cfg.start);
  m["side_km"] = cfg.side_km;
  m["n_boroughs"] = cfg.n_boroughs;
  m["k"] = city.k;
  m["target_mean"] = cfg.target_mean;
  m["alpha"] = cfg.alpha;
  m["gamma"] = cfg.gamma;
  m["beta"] = cfg.beta;
  m["decay_form"] = to_string(cfg.decay_form);
  m["temporal_amplitude"] = cfg.temporal_amplitude;
  m["poi_effect"] = cfg.poi_effect;
  m["origin_effect_sd"] = cfg.origin_effect_sd;
  m["zero_inflation"] = cfg.zero_inflation;
  m["poi_log_mean"] = cfg.poi_log_mean;
  m["poi_log_sd"] = cfg.poi_log_sd;
  m["intrazonal"] = cfg.intrazonal;
  m["mass_definition"] = "poi_total + 1";
  m["mass"] = city.mass;
  m["origin_effect"] = city.origin_effect;
  m["temporal_by_hour_of_week"] = city.temporal;
  return city;
}

struct TripSynthesisConfig {
  double speed_kmh = 20.0;
  double detour = 1.3;
  double duration_noise = 0.0;  // relative sd of trip duration
  std::uint64_t seed = 7;
};

// Expands hourly counts into individual trip records (one per unit of flow).
inline std::vector<TripRecord> synthesize_trips(const FlowTable& flows, const ZoneTable& zones,
                                                const TripSynthesisConfig& cfg = {}) {
  Rng rng(derive_seed(cfg.seed, 3));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<TripRecord> trips;
  trips.reserve(static_cast<std::size_t>(flows.total_flow()));
  for (const auto& r : flows) {
    const double km = std::max(kDistanceFloor, centroid_km(zones[r.origin], zones[r.dest]));
    for (std::int64_t u = 0; u < r.flow; ++u) {
      TripRecord t;
      t.pickup_s = r.hour * 3600 + static_cast<std::int64_t>(uniform_below(rng, 3600));
      double minutes = km / cfg.speed_kmh * 60.0;
      if (cfg.duration_noise > 0) minutes *= std::max(0.2, 1.0 + cfg.duration_noise * noise(rng));
      t.minutes = std::clamp(std::round(minutes * 1000.0) / 1000.0, 1.0, 180.0);
      t.km = std::clamp(std::round(km * cfg.detour * 1000.0) / 1000.0, 0.1, 100.0);
      t.dropoff_s = t.pickup_s + static_cast<std::int64_t>(t.minutes * 60.0);
      t.pu_zone = zones[r.origin].id;
      t.do_zone = zones[r.dest].id;
      trips.push_back(t);
    }
  }
  return trips;
}

}  // namespace ambit::od
