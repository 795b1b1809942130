#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

namespace ambit {

// Fixed-precision rendering used by every report writer; identical inputs
// always produce identical bytes.
inline std::string fmt_num(double x, int precision = 6) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  std::string s(buf);
  // "-0.000000" -> "0.000000"
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string fmt_num(const std::optional<double>& x, int precision = 6) {
  return x ? fmt_num(*x, precision) : std::string("NA");
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace ambit
