#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fgam/error.hpp"
#include "fgam/matrix.hpp"

namespace fgam {

// Model-ready inputs for a batch of examples: standardized numeric statics,
// integer category codes (row-major, one column per categorical static) and
// the standardized time-varying block.
struct ModelInput {
  Matrix static_numeric;
  std::size_t n_categorical = 0;
  std::vector<std::size_t> static_codes;
  Matrix tv;

  std::size_t rows() const { return tv.rows(); }

  std::span<const std::size_t> codes(std::size_t r) const {
    return {static_codes.data() + r * n_categorical, n_categorical};
  }

  void validate() const {
    const std::size_t n = rows();
    if (static_numeric.rows() != n) throw DimensionError("static block row count differs from time-varying block");
    if (static_codes.size() != n * n_categorical) throw DimensionError("category code count does not match rows");
  }

  ModelInput subset(std::span<const std::size_t> idx) const {
    ModelInput out;
    out.static_numeric = gather_rows(static_numeric, idx);
    out.tv = gather_rows(tv, idx);
    out.n_categorical = n_categorical;
    out.static_codes.reserve(idx.size() * n_categorical);
    for (std::size_t r : idx) {
      auto c = codes(r);
      out.static_codes.insert(out.static_codes.end(), c.begin(), c.end());
    }
    return out;
  }

  friend bool operator==(const ModelInput&, const ModelInput&) = default;
};

// One encoded example.
struct Example {
  std::vector<double> static_numeric;
  std::vector<std::size_t> static_codes;
  std::vector<double> tv;

  ModelInput as_batch() const {
    ModelInput in;
    in.static_numeric = Matrix::from_values(1, static_numeric.size(), static_numeric);
    in.n_categorical = static_codes.size();
    in.static_codes = static_codes;
    in.tv = Matrix::from_values(1, tv.size(), tv);
    return in;
  }

  friend bool operator==(const Example&, const Example&) = default;
};

inline Example example_at(const ModelInput& in, std::size_t r) {
  Example e;
  auto s = in.static_numeric.row(r);
  e.static_numeric.assign(s.begin(), s.end());
  auto c = in.codes(r);
  e.static_codes.assign(c.begin(), c.end());
  auto t = in.tv.row(r);
  e.tv.assign(t.begin(), t.end());
  return e;
}

// Standardized design matrix plus binary labels and case identifiers.
struct TabularDataset {
  ModelInput x;
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t rows() const { return labels.size(); }

  void validate() const {
    x.validate();
    if (x.rows() != labels.size()) throw DimensionError("label count does not match rows");
    if (!ids.empty() && ids.size() != labels.size()) throw DimensionError("id count does not match rows");
    for (int y : labels) {
      if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
    }
  }

  TabularDataset subset(std::span<const std::size_t> idx) const {
    TabularDataset out;
    out.x = x.subset(idx);
    out.labels.reserve(idx.size());
    for (std::size_t r : idx) out.labels.push_back(labels[r]);
    if (!ids.empty()) {
      for (std::size_t r : idx) out.ids.push_back(ids[r]);
    }
    return out;
  }
};

}  // namespace fgam
