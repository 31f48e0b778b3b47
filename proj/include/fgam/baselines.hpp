#pragma once

// Reference configurations expressed as degenerate F-GAMs.

#include <cstddef>
#include <span>

#include "fgam/model.hpp"
#include "fgam/tabular.hpp"

namespace fgam {

// Design matrix for plain logistic regression: numeric statics, one-hot
// categoricals and the time-varying block side by side, with no statics.
inline ModelInput logistic_design(const ModelInput& in, std::span<const std::size_t> cardinalities) {
  in.validate();
  if (cardinalities.size() != in.n_categorical) throw DimensionError("cardinality count does not match input");
  std::size_t onehot = 0;
  for (std::size_t c : cardinalities) onehot += c;
  const std::size_t n = in.rows();
  const std::size_t ns = in.static_numeric.cols(), nt = in.tv.cols();
  ModelInput out;
  out.static_numeric = Matrix(n, 0);
  out.n_categorical = 0;
  out.tv = Matrix(n, ns + onehot + nt);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < ns; ++j) out.tv(r, k++) = in.static_numeric(r, j);
    const auto codes = in.codes(r);
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (codes[j] >= cardinalities[j]) throw InvalidArgument("category code out of range");
      out.tv(r, k + codes[j]) = 1.0;
      k += cardinalities[j];
    }
    for (std::size_t j = 0; j < nt; ++j) out.tv(r, k++) = in.tv(r, j);
  }
  return out;
}

inline TabularDataset logistic_design(const TabularDataset& d, std::span<const std::size_t> cardinalities) {
  TabularDataset out = d;
  out.x = logistic_design(d.x, cardinalities);
  return out;
}

// Logistic regression as an F-GAM: identity feature maps, constant weights.
inline FGamConfig logistic_config(std::size_t n_inputs) {
  FGamConfig c;
  c.d_tv = n_inputs;
  c.frozen_identity_features = true;
  c.trunk_widths = {};
  c.dropout_rate = 0.0;
  return c;
}

// Constant per-feature weights on learned shape functions; statics unused.
inline FGamConfig delr_config(const FGamConfig& base) {
  FGamConfig c = base;
  c.static_numeric = 0;
  c.static_cardinalities.clear();
  return c;
}

}  // namespace fgam
