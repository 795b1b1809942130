#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ambit/util/error.hpp"

namespace ambit {

// Dense row-major design with named columns.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t rows = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> n, std::size_t r)
      : names(std::move(n)), rows(r), data(r * names.size(), 0.0) {}

  std::size_t cols() const { return names.size(); }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols(), cols()};
  }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw Error("missing feature '" + name + "'");
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }

  // Columns reordered (and possibly subset) to match `wanted`.
  FeatureMatrix select(const std::vector<std::string>& wanted) const {
    std::vector<std::size_t> idx;
    for (const auto& w : wanted) idx.push_back(column_index(w));
    FeatureMatrix out(wanted, rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) out.at(r, c) = at(r, idx[c]);
    return out;
  }
};

}  // namespace ambit
