#pragma once

// Small reverse-mode kernel: dense layers, multilayer perceptrons,
// embedding tables and a central-difference gradient checker. Everything is
// double precision and operates on whole mini-batches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fgam/error.hpp"
#include "fgam/matrix.hpp"

namespace fgam {

using Rng = std::mt19937_64;

enum class Activation { relu, identity };
enum class Mode { train, eval };

inline const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw InvalidArgument("unknown activation '" + s + "'");
}

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t in_width() const { return weight.cols(); }
  std::size_t out_width() const { return weight.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct LayerGrad {
  Matrix weight;
  std::vector<double> bias;
};

struct Mlp {
  std::vector<DenseLayer> layers;
  double dropout_rate = 0.0;

  std::size_t in_width() const { return layers.empty() ? 0 : layers.front().in_width(); }
  std::size_t out_width() const { return layers.empty() ? 0 : layers.back().out_width(); }

  void validate() const {
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
      throw InvalidArgument("dropout rate must lie in [0, 1)");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      if (layer.bias.size() != layer.out_width()) {
        throw DimensionError("layer " + std::to_string(l) + ": bias length " +
                             std::to_string(layer.bias.size()) + " != output width " +
                             std::to_string(layer.out_width()));
      }
      if (l > 0 && layers[l - 1].out_width() != layer.in_width()) {
        throw DimensionError("layer " + std::to_string(l) + " expects width " +
                             std::to_string(layer.in_width()) + " but upstream emits " +
                             std::to_string(layers[l - 1].out_width()));
      }
    }
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Everything the backward pass needs from one forward call.
struct MlpCache {
  std::size_t batch_rows = 0;
  std::vector<Matrix> inputs;           // input seen by each layer
  std::vector<Matrix> pre_activations;  // X W^T + b per layer
  std::vector<Matrix> masks;            // inverted-dropout mask on each layer's output; empty if none
};

struct MlpForward {
  Matrix outputs;
  MlpCache cache;
};

struct MlpBackward {
  std::vector<LayerGrad> layer_grads;
  Matrix in_grad;
};

namespace detail {

inline Matrix dense_affine(const DenseLayer& layer, const Matrix& x) {
  const std::size_t n = x.rows(), in = layer.in_width(), out = layer.out_width();
  Matrix z(n, out);
  for (std::size_t r = 0; r < n; ++r) {
    auto xr = x.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      auto wo = layer.weight.row(o);
      double acc = layer.bias[o];
      for (std::size_t k = 0; k < in; ++k) acc += xr[k] * wo[k];
      z(r, o) = acc;
    }
  }
  return z;
}

}  // namespace detail

// Forward pass through every layer. Dropout is applied to the output of relu
// layers in train mode only, with inverted scaling so eval needs no rescale.
inline MlpForward mlp_forward(const Mlp& mlp, const Matrix& batch, Mode mode, Rng* rng = nullptr) {
  mlp.validate();
  if (!mlp.layers.empty() && batch.cols() != mlp.in_width()) {
    throw DimensionError("batch has " + std::to_string(batch.cols()) +
                         " columns, network expects " + std::to_string(mlp.in_width()));
  }
  const bool dropout = mode == Mode::train && mlp.dropout_rate > 0.0;
  if (dropout && rng == nullptr) throw InvalidArgument("train-mode dropout requires an rng");

  MlpForward fwd;
  fwd.cache.batch_rows = batch.rows();
  Matrix current = batch;
  std::bernoulli_distribution keep(1.0 - mlp.dropout_rate);
  const double scale = dropout ? 1.0 / (1.0 - mlp.dropout_rate) : 1.0;

  for (const auto& layer : mlp.layers) {
    Matrix z = detail::dense_affine(layer, current);
    Matrix a = z;
    Matrix mask;
    if (layer.activation == Activation::relu) {
      for (double& v : a.values()) v = v > 0.0 ? v : 0.0;
      if (dropout) {
        mask = Matrix(a.rows(), a.cols());
        auto mv = mask.values();
        auto av = a.values();
        for (std::size_t i = 0; i < av.size(); ++i) {
          mv[i] = keep(*rng) ? scale : 0.0;
          av[i] *= mv[i];
        }
      }
    }
    fwd.cache.inputs.push_back(std::move(current));
    fwd.cache.pre_activations.push_back(std::move(z));
    fwd.cache.masks.push_back(std::move(mask));
    current = std::move(a);
  }
  require_finite(current, "mlp output");
  fwd.outputs = std::move(current);
  return fwd;
}

namespace detail {

// Gradients of one layer given the upstream gradient w.r.t. its output; `g` is
// modified in place to fold in the activation derivative.
inline Matrix dense_backward(const DenseLayer& layer, const Matrix& x, const Matrix& z, Matrix& g,
                             LayerGrad& lg) {
  if (layer.activation == Activation::relu) {
    auto gv = g.values();
    auto zv = z.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (!(zv[i] > 0.0)) gv[i] = 0.0;
    }
  }
  const std::size_t n = x.rows(), in = layer.in_width(), out = layer.out_width();
  lg.weight = Matrix(out, in);
  lg.bias.assign(out, 0.0);
  Matrix dx(n, in);
  for (std::size_t r = 0; r < n; ++r) {
    auto xr = x.row(r);
    auto dxr = dx.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      const double go = g(r, o);
      if (go == 0.0) continue;
      lg.bias[o] += go;
      auto dwo = lg.weight.row(o);
      auto wo = layer.weight.row(o);
      for (std::size_t k = 0; k < in; ++k) {
        dwo[k] += go * xr[k];
        dxr[k] += go * wo[k];
      }
    }
  }
  return dx;
}

}  // namespace detail

inline MlpBackward mlp_backward(const Mlp& mlp, const MlpCache& cache, const Matrix& out_grad) {
  const std::size_t depth = mlp.layers.size();
  if (cache.inputs.size() != depth || cache.pre_activations.size() != depth ||
      cache.masks.size() != depth) {
    throw InvalidArgument("activation cache does not belong to this network");
  }
  if (out_grad.rows() != cache.batch_rows || (depth > 0 && out_grad.cols() != mlp.out_width())) {
    throw DimensionError("output gradient " + out_grad.shape_string() +
                         " does not match forward outputs");
  }

  MlpBackward bwd;
  bwd.layer_grads.resize(depth);
  Matrix g = out_grad;
  for (std::size_t li = depth; li-- > 0;) {
    const auto& layer = mlp.layers[li];
    const Matrix& x = cache.inputs[li];
    const Matrix& z = cache.pre_activations[li];
    if (x.rows() != cache.batch_rows || x.cols() != layer.in_width() ||
        z.cols() != layer.out_width()) {
      throw InvalidArgument("stale activation cache at layer " + std::to_string(li));
    }
    if (!cache.masks[li].empty()) {
      auto gv = g.values();
      auto mv = cache.masks[li].values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= mv[i];
    }
    g = detail::dense_backward(layer, x, z, g, bwd.layer_grads[li]);
  }
  bwd.in_grad = std::move(g);
  return bwd;
}

struct EmbeddingTable {
  Matrix vectors;  // cardinality x dim

  std::size_t cardinality() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

inline void check_indices(const EmbeddingTable& table, std::span<const std::size_t> indices) {
  for (std::size_t idx : indices) {
    if (idx >= table.cardinality()) {
      throw InvalidArgument("embedding index " + std::to_string(idx) + " out of range for " +
                            std::to_string(table.cardinality()) + " rows");
    }
  }
}

inline Matrix embedding_forward(const EmbeddingTable& table, std::span<const std::size_t> indices) {
  check_indices(table, indices);
  return gather_rows(table.vectors, indices);
}

// Gradient w.r.t. the table. Only rows that were looked up receive mass.
inline Matrix embedding_backward(const EmbeddingTable& table, std::span<const std::size_t> indices,
                                 const Matrix& out_grad) {
  check_indices(table, indices);
  if (out_grad.rows() != indices.size() || out_grad.cols() != table.dim()) {
    throw DimensionError("embedding gradient " + out_grad.shape_string() + " does not match lookup");
  }
  Matrix grad(table.cardinality(), table.dim());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto dst = grad.row(indices[i]);
    auto src = out_grad.row(i);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return grad;
}

// He scaling for relu layers, Glorot for identity layers. Biases start at 0.
inline DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  DenseLayer layer;
  layer.weight = Matrix(out, in);
  layer.bias.assign(out, 0.0);
  layer.activation = act;
  if (in == 0 || out == 0) return layer;
  const double sd = act == Activation::relu ? std::sqrt(2.0 / static_cast<double>(in))
                                            : std::sqrt(2.0 / static_cast<double>(in + out));
  std::normal_distribution<double> normal(0.0, sd);
  for (double& w : layer.weight.values()) w = normal(rng);
  return layer;
}

// `widths` lists every layer's output width; hidden layers use `hidden`,
// the last one uses `last`.
inline Mlp make_mlp(std::size_t in, std::span<const std::size_t> widths, Activation hidden,
                    Activation last, double dropout_rate, Rng& rng) {
  Mlp mlp;
  mlp.dropout_rate = dropout_rate;
  std::size_t width = in;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const Activation act = l + 1 == widths.size() ? last : hidden;
    mlp.layers.push_back(make_dense(width, widths[l], act, rng));
    width = widths[l];
  }
  mlp.validate();
  return mlp;
}

inline EmbeddingTable make_embedding(std::size_t cardinality, std::size_t dim, Rng& rng) {
  EmbeddingTable table{Matrix(cardinality, dim)};
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(dim, 1))));
  for (double& v : table.vectors.values()) v = normal(rng);
  return table;
}

// One parameter array and its analytic gradient, for grad_check.
struct ParamRef {
  std::span<double> values;
  std::span<const double> grad;
};

// Max over all parameters of |analytic - central difference| / max(1, |central difference|).
// `loss` must be deterministic; parameters are perturbed in place and restored.
template <class LossFn>
double grad_check(LossFn&& loss, std::span<const ParamRef> params, double eps = 1e-5) {
  double worst = 0.0;
  for (const auto& p : params) {
    if (p.values.size() != p.grad.size()) throw DimensionError("gradient length mismatch in grad_check");
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double saved = p.values[i];
      p.values[i] = saved + eps;
      const double up = loss();
      p.values[i] = saved - eps;
      const double down = loss();
      p.values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) throw NonFiniteError("non-finite loss in grad_check");
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(p.grad[i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace fgam
