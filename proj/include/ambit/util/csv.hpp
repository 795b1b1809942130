#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ambit/util/error.hpp"

namespace ambit {

// Splits one CSV record. Double-quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) return;
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    columns_ = split_csv_line(header);
    for (std::size_t i = 0; i < columns_.size(); ++i) index_[columns_[i]] = i;
  }

  bool empty_header() const { return columns_.empty(); }

  std::size_t require(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw IngestError("missing required column '" + name + "'");
    return it->second;
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  // Returns false at end of input; blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      fields = split_csv_line(line);
      if (fields.size() < columns_.size())
        throw IngestError("line " + std::to_string(line_no_ + 1) + ": expected " +
                          std::to_string(columns_.size()) + " fields, got " +
                          std::to_string(fields.size()));
      return true;
    }
    return false;
  }

  std::size_t line_number() const { return line_no_ + 1; }

 private:
  std::istream& in_;
  std::vector<std::string> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_no_ = 0;
};

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() && s.find_first_not_of(" \t", pos) != std::string::npos) throw 0;
    return v;
  } catch (...) {
    throw IngestError(std::string("cannot parse ") + what + " from '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() && s.find_first_not_of(" \t", pos) != std::string::npos) throw 0;
    return v;
  } catch (...) {
    throw IngestError(std::string("cannot parse ") + what + " from '" + s + "'");
  }
}

}  // namespace ambit
