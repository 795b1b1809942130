#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambit/eval/metrics.hpp"
#include "ambit/experiment/config.hpp"
#include "ambit/util/error.hpp"
#include "ambit/util/format.hpp"

namespace ambit::experiment {

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool measurement = false;  // wall-clock content; never byte-stable

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size())
      throw Error("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                  std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_escape(columns[i]);
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_escape(r[i]);
      out += '\n';
    }
    return out;
  }
};

struct PresetOutput {
  std::string preset;
  std::deque<Table> tables;
  std::map<std::string, std::string> files;  // extra deterministic files by name
  std::vector<std::string> notes;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
  Table& table(std::string name, std::vector<std::string> columns, bool measurement = false) {
    tables.push_back({std::move(name), std::move(columns), {}, measurement});
    return tables.back();
  }
};

enum class Col { mae, rmse, smape, r2, cpc };

inline std::string num(double x) { return fmt_num(x, 6); }

inline std::string metric_cell(const eval::Metrics& m, Col c) {
  switch (c) {
    case Col::mae: return num(m.mae);
    case Col::rmse: return num(m.rmse);
    case Col::smape: return num(m.smape);
    case Col::r2: return fmt_num(m.r2, 6);
    case Col::cpc: return num(m.cpc);
  }
  return "NA";
}

inline std::vector<std::string> metric_cells(const std::optional<eval::Metrics>& m,
                                             std::initializer_list<Col> cols) {
  std::vector<std::string> out;
  for (auto c : cols) out.push_back(m ? metric_cell(*m, c) : "NA");
  return out;
}

inline std::vector<std::string> row_of(std::vector<std::string> head, std::vector<std::string> tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

inline const std::initializer_list<Col> kCore{Col::mae, Col::rmse, Col::r2, Col::cpc};
inline const std::initializer_list<Col> kFull{Col::mae, Col::rmse, Col::smape, Col::r2, Col::cpc};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << s;
  if (!out) throw Error("write failed for '" + p.string() + "'");
}

// Writes every table and file plus manifest.json into `dir`. Nothing written
// depends on the clock except tables flagged as measurements.
inline nlohmann::json write_output(const PresetOutput& o, const ExperimentConfig& cfg,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& t : o.tables) {
    const auto text = t.csv();
    write_text(dir / (t.name + ".csv"), text);
    nlohmann::json e{{"file", t.name + ".csv"}, {"rows", t.rows.size()}, {"columns", t.columns},
                     {"measurement", t.measurement}};
    if (!t.measurement) e["fnv1a"] = hex64(fnv1a(text));
    outputs.push_back(std::move(e));
  }
  for (const auto& [name, text] : o.files) {
    write_text(dir / name, text);
    outputs.push_back({{"file", name}, {"measurement", false}, {"fnv1a", hex64(fnv1a(text))}});
  }
  nlohmann::json m{{"preset", o.preset},
                   {"config_hash", config_hash(cfg)},
                   {"config", to_text(cfg, false)},
                   {"outputs", outputs},
                   {"notes", o.notes},
                   {"errors", o.errors},
                   {"status", o.ok() ? "ok" : "failed"}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

}  // namespace ambit::experiment
