#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "ambit/util/error.hpp"

namespace ambit::experiment {

struct DataSection {
  std::string source = "synthetic";  // synthetic | files
  std::string zones;
  std::string flows;
  std::string trips;  // optional, feeds the travel-time impedance
};

// Defaults describe the bundled small city.
struct SyntheticSection {
  int n_zones = 24;
  int weeks = 5;
  std::string start = "2025-01-06 00:00:00";
  double side_km = 20.0;
  int n_boroughs = 4;
  double target_mean = 3.0;
  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 1.5;
  std::string decay = "power";
  double temporal_amplitude = 0.6;
  double poi_effect = 1.0;
  double origin_effect_sd = 0.3;
  double zero_inflation = 0.3;
  double poi_log_sd = 1.0;
  bool intrazonal = false;
  std::uint64_t seed = 42;
};

// Empty boundaries: test is the last week of data, validation the week before.
struct SplitSection {
  std::string train_start;
  std::string train_end;
  std::string val_end;
  std::string test_end;
  std::string sampling = "random";
  std::size_t max_train_rows = 12000;
  std::size_t max_eval_rows = 6000;
};

struct FilterSection {
  std::int64_t min_total = 200;
  std::size_t top_k = 30000;
  std::vector<double> sensitivity_top_k{30000, 150};
};

struct BoostSection {
  int n_estimators = 500;
  int max_depth = 8;
  double learning_rate = 0.05;
  double subsample = 0.8;
  double colsample = 0.8;
  int early_stopping_rounds = 50;
  double min_child_weight = 1.0;
  double lambda = 1.0;
  int max_bins = 256;
  double tweedie_power = 1.5;
};

struct PpmlSection {
  std::size_t sampled_hours = 200;
  std::size_t zero_budget = 1'000'000;
  std::vector<double> ratio_sweep{0.32, 1.0, 3.0};
  std::size_t fe_max_rows = 6000;
  std::size_t count_max_rows = 100'000;
};

struct GridSection {
  std::vector<double> beta_power{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> beta_exp{0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
  std::vector<double> gamma{0.5, 1.0, 1.5, 2.0};
  std::vector<double> rho{0.5, 1.0, 1.5, 2.0};
  std::vector<double> delta{0.5, 1.0, 1.5, 2.0};
};

struct HoldoutSection {
  double fraction = 0.10;
  std::uint64_t seed = 42;
  std::vector<std::string> boroughs;  // empty: every borough in the zone table
};

struct ShapSection {
  std::size_t rows_per_window = 250;
};

struct ImpedanceSection {
  std::size_t trip_rows = 2000;  // synthetic source: flow rows expanded into trips
  double duration_noise = 0.15;
  double speed_kmh = 20.0;
};

struct ExperimentConfig {
  std::string preset;
  std::vector<std::uint64_t> seeds{42, 43, 44};
  std::string out = "ambit_out";
  bool parallel = false;
  std::vector<std::string> models{"gravity_flow", "gravity_poi", "ppml", "ppml_all",
                                  "ppml_fe",      "xgb_direct",  "ambit_gravity_poi"};
  DataSection data;
  SyntheticSection synthetic;
  SplitSection split;
  FilterSection filter;
  BoostSection boost;
  PpmlSection ppml;
  GridSection grids;
  HoldoutSection holdout;
  ShapSection shap;
  ImpedanceSection impedance;

  std::uint64_t seed() const { return seeds.front(); }
};

namespace detail {

struct Value {
  enum class Kind { string, number, boolean, array } kind = Kind::string;
  std::string text;  // string contents or the number literal
  bool flag = false;
  std::vector<Value> items;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class ValueParser {
 public:
  ValueParser(std::string_view s, std::string where) : s_(s), where_(std::move(where)) {}

  Value parse() {
    Value v = value();
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(where_ + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  Value value() {
    skip();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    Value v;
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' && s_[pos_] != '\t')
      ++pos_;
    const auto word = s_.substr(start, pos_ - start);
    if (word == "true" || word == "false") {
      v.kind = Value::Kind::boolean;
      v.flag = word == "true";
      return v;
    }
    double d = 0;
    const auto res = std::from_chars(word.data(), word.data() + word.size(), d);
    if (res.ec != std::errc() || res.ptr != word.data() + word.size())
      fail("cannot parse value '" + std::string(word) + "'");
    v.kind = Value::Kind::number;
    v.text = std::string(word);
    return v;
  }
  Value string() {
    Value v;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      v.text += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }
  Value array() {
    Value v;
    v.kind = Value::Kind::array;
    ++pos_;
    skip();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.items.push_back(value());
      skip();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      if (s_[pos_] != ',') fail("expected ',' in array");
      ++pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
    }
  }

  std::string_view s_;
  std::string where_;
  std::size_t pos_ = 0;
};

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

inline std::string number_text(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double as_number(const Value& v, const std::string& where) {
  if (v.kind != Value::Kind::number) throw ConfigError(where + ": expected a number");
  double d = 0;
  std::from_chars(v.text.data(), v.text.data() + v.text.size(), d);
  return d;
}

template <class T>
T as_integer(const Value& v, const std::string& where) {
  if (v.kind != Value::Kind::number) throw ConfigError(where + ": expected an integer");
  T out{};
  const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
  if (res.ec != std::errc() || res.ptr != v.text.data() + v.text.size())
    throw ConfigError(where + ": expected an integer in range, got '" + v.text + "'");
  return out;
}

inline std::string encode(const std::string& v) { return quote(v); }
inline std::string encode(bool v) { return v ? "true" : "false"; }
inline std::string encode(double v) { return number_text(v); }
template <class T>
  requires std::is_integral_v<T>
std::string encode(T v) {
  return std::to_string(v);
}
template <class T>
std::string encode(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + encode(v[i]);
  return out + "]";
}

inline void decode(const Value& v, std::string& out, const std::string& where) {
  if (v.kind != Value::Kind::string) throw ConfigError(where + ": expected a quoted string");
  out = v.text;
}
inline void decode(const Value& v, bool& out, const std::string& where) {
  if (v.kind != Value::Kind::boolean) throw ConfigError(where + ": expected true or false");
  out = v.flag;
}
inline void decode(const Value& v, double& out, const std::string& where) { out = as_number(v, where); }
template <class T>
  requires std::is_integral_v<T>
void decode(const Value& v, T& out, const std::string& where) {
  out = as_integer<T>(v, where);
}
template <class T>
void decode(const Value& v, std::vector<T>& out, const std::string& where) {
  if (v.kind != Value::Kind::array) throw ConfigError(where + ": expected an array");
  out.clear();
  for (const auto& item : v.items) {
    T x{};
    decode(item, x, where);
    out.push_back(std::move(x));
  }
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const Value&, const std::string&)> set;
  bool runtime = false;  // output location and scheduling; not part of the experiment
};

template <class Access>
Field field(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](const ExperimentConfig& c) { return encode(access(const_cast<ExperimentConfig&>(c))); },
          [access](ExperimentConfig& c, const Value& v, const std::string& where) {
            decode(v, access(c), where);
          }};
}

inline Field runtime(Field f) {
  f.runtime = true;
  return f;
}

#define AMBIT_FIELD(section, member) \
  field(#section, #member, [](ExperimentConfig& c) -> auto& { return c.section.member; })
#define AMBIT_TOP(member) field("", #member, [](ExperimentConfig& c) -> auto& { return c.member; })

inline const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      AMBIT_TOP(preset),
      AMBIT_TOP(seeds),
      runtime(AMBIT_TOP(out)),
      runtime(AMBIT_TOP(parallel)),
      AMBIT_TOP(models),
      AMBIT_FIELD(data, source),
      AMBIT_FIELD(data, zones),
      AMBIT_FIELD(data, flows),
      AMBIT_FIELD(data, trips),
      AMBIT_FIELD(synthetic, n_zones),
      AMBIT_FIELD(synthetic, weeks),
      AMBIT_FIELD(synthetic, start),
      AMBIT_FIELD(synthetic, side_km),
      AMBIT_FIELD(synthetic, n_boroughs),
      AMBIT_FIELD(synthetic, target_mean),
      AMBIT_FIELD(synthetic, alpha),
      AMBIT_FIELD(synthetic, gamma),
      AMBIT_FIELD(synthetic, beta),
      AMBIT_FIELD(synthetic, decay),
      AMBIT_FIELD(synthetic, temporal_amplitude),
      AMBIT_FIELD(synthetic, poi_effect),
      AMBIT_FIELD(synthetic, origin_effect_sd),
      AMBIT_FIELD(synthetic, zero_inflation),
      AMBIT_FIELD(synthetic, poi_log_sd),
      AMBIT_FIELD(synthetic, intrazonal),
      AMBIT_FIELD(synthetic, seed),
      AMBIT_FIELD(split, train_start),
      AMBIT_FIELD(split, train_end),
      AMBIT_FIELD(split, val_end),
      AMBIT_FIELD(split, test_end),
      AMBIT_FIELD(split, sampling),
      AMBIT_FIELD(split, max_train_rows),
      AMBIT_FIELD(split, max_eval_rows),
      AMBIT_FIELD(filter, min_total),
      AMBIT_FIELD(filter, top_k),
      AMBIT_FIELD(filter, sensitivity_top_k),
      AMBIT_FIELD(boost, n_estimators),
      AMBIT_FIELD(boost, max_depth),
      AMBIT_FIELD(boost, learning_rate),
      AMBIT_FIELD(boost, subsample),
      AMBIT_FIELD(boost, colsample),
      AMBIT_FIELD(boost, early_stopping_rounds),
      AMBIT_FIELD(boost, min_child_weight),
      AMBIT_FIELD(boost, lambda),
      AMBIT_FIELD(boost, max_bins),
      AMBIT_FIELD(boost, tweedie_power),
      AMBIT_FIELD(ppml, sampled_hours),
      AMBIT_FIELD(ppml, zero_budget),
      AMBIT_FIELD(ppml, ratio_sweep),
      AMBIT_FIELD(ppml, fe_max_rows),
      AMBIT_FIELD(ppml, count_max_rows),
      AMBIT_FIELD(grids, beta_power),
      AMBIT_FIELD(grids, beta_exp),
      AMBIT_FIELD(grids, gamma),
      AMBIT_FIELD(grids, rho),
      AMBIT_FIELD(grids, delta),
      AMBIT_FIELD(holdout, fraction),
      AMBIT_FIELD(holdout, seed),
      AMBIT_FIELD(holdout, boroughs),
      AMBIT_FIELD(shap, rows_per_window),
      AMBIT_FIELD(impedance, trip_rows),
      AMBIT_FIELD(impedance, duration_noise),
      AMBIT_FIELD(impedance, speed_kmh),
  };
  return f;
}

#undef AMBIT_FIELD
#undef AMBIT_TOP

inline const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  if (c.seeds.empty()) throw ConfigError("seeds must list at least one seed");
  if (c.data.source != "synthetic" && c.data.source != "files")
    throw ConfigError("data.source must be \"synthetic\" or \"files\"");
  if (c.data.source == "files" && (c.data.zones.empty() || c.data.flows.empty()))
    throw ConfigError("data.source = \"files\" needs data.zones and data.flows");
  if (c.synthetic.weeks < 3) throw ConfigError("synthetic.weeks must be >= 3 (train, val and test)");
  if (c.split.sampling != "random" && c.split.sampling != "stratified")
    throw ConfigError("split.sampling must be \"random\" or \"stratified\"");
  if (c.filter.sensitivity_top_k.empty()) throw ConfigError("filter.sensitivity_top_k is empty");
  for (double k : c.filter.sensitivity_top_k)
    if (!(k >= 1)) throw ConfigError("filter.sensitivity_top_k entries must be >= 1");
  if (!(c.holdout.fraction > 0 && c.holdout.fraction < 1))
    throw ConfigError("holdout.fraction must be in (0, 1)");
  if (c.shap.rows_per_window == 0) throw ConfigError("shap.rows_per_window must be positive");
  const auto& b = c.boost;
  if (b.n_estimators < 1 || b.max_depth < 1 || b.max_bins < 2)
    throw ConfigError("boost.n_estimators and boost.max_depth must be >= 1, boost.max_bins >= 2");
  if (!(b.learning_rate > 0) || !(b.subsample > 0 && b.subsample <= 1) || !(b.colsample > 0 && b.colsample <= 1))
    throw ConfigError("boost.learning_rate must be positive, subsample and colsample in (0, 1]");
  if (b.min_child_weight < 0 || b.lambda < 0) throw ConfigError("boost.min_child_weight and boost.lambda must be >= 0");
  if (!(b.tweedie_power > 1 && b.tweedie_power < 2)) throw ConfigError("boost.tweedie_power must be in (1, 2)");
  if (c.split.max_train_rows == 0 || c.split.max_eval_rows == 0) throw ConfigError("split row caps must be positive");
}

// Applies `key = value` lines (with optional [section] headers) on top of `c`.
inline void apply_text(ExperimentConfig& c, std::string_view text, const std::string& origin = "config") {
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    std::string line;
    bool quoted = false;
    for (char ch : raw) {
      if (ch == '"') quoted = !quoted;
      if (ch == '#' && !quoted) break;
      line += ch;
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = detail::trim(std::string_view(line).substr(0, eq));
    const auto* f = detail::find_field(section, key);
    if (!f) {
      throw ConfigError(where + ": unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
    const auto v = detail::ValueParser(std::string_view(line).substr(eq + 1), where).parse();
    f->set(c, v, where);
  }
}

// Single override of the form section.key=value (top-level keys have no dot).
inline void apply_override(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const auto path = detail::trim(std::string_view(assignment).substr(0, eq));
  const auto dot = path.find('.');
  std::string text;
  if (dot != std::string::npos) text = "[" + path.substr(0, dot) + "]\n" + path.substr(dot + 1);
  else text = path;
  apply_text(c, text + " = " + assignment.substr(eq + 1), "override");
}

inline ExperimentConfig parse_config(std::string_view text, const std::string& origin = "config") {
  ExperimentConfig c;
  apply_text(c, text, origin);
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

// Canonical text: every key, fixed order, shortest round-trip numbers.
inline std::string to_text(const ExperimentConfig& c, bool with_runtime = true) {
  std::string out, section = "\x01";
  for (const auto& f : detail::fields()) {
    if (f.runtime && !with_runtime) continue;
    if (f.section != section) {
      if (!f.section.empty()) out += "\n[" + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Output root and --parallel do not change results and are left out.
inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(to_text(c, false))); }

}  // namespace ambit::experiment
