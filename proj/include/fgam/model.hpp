#pragma once

// Factored generalized additive model:
//
//   logit(x) = w_0(x_s) + sum_t w_t(x_s) * f_t(x_t)
//   p(x)     = sigmoid(logit(x))
//
// Each time-varying feature x_t goes through its own narrow network f_t.
// The static block x_s (numeric columns plus embedded categoricals) feeds a
// shared trunk; two linear heads on the trunk's last hidden layer emit the
// weights w_1..w_D and the bias w_0.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fgam/diff_core.hpp"
#include "fgam/error.hpp"
#include "fgam/matrix.hpp"
#include "fgam/tabular.hpp"

namespace fgam {

struct FGamConfig {
  std::size_t static_numeric = 0;
  // Rows per embedding table, one table per categorical static feature.
  std::vector<std::size_t> static_cardinalities;
  std::size_t d_tv = 0;
  std::size_t dnnn_depth = 4;
  std::size_t dnnn_width = 8;
  std::vector<std::size_t> trunk_widths{64, 32};
  std::size_t embedding_dim = 4;
  double dropout_rate = 0.1;
  bool trunk_dropout = true;
  // Every f_t is a single frozen identity layer; with no statics this is
  // plain logistic regression on the time-varying block.
  bool frozen_identity_features = false;

  std::size_t n_categorical() const { return static_cardinalities.size(); }
  std::size_t d_static() const { return static_numeric + n_categorical(); }
  std::size_t trunk_input_width() const { return static_numeric + n_categorical() * embedding_dim; }

  void validate() const {
    if (d_static() == 0 && d_tv == 0) throw InvalidArgument("model needs static or time-varying inputs");
    if (!frozen_identity_features && d_tv > 0 && dnnn_depth == 0) {
      throw InvalidArgument("feature network depth must be at least 1");
    }
    if (dnnn_depth > 1 && dnnn_width == 0) throw InvalidArgument("feature network width must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw InvalidArgument("dropout rate must lie in [0, 1)");
    for (std::size_t w : trunk_widths) {
      if (w == 0) throw InvalidArgument("trunk widths must be positive");
    }
    for (std::size_t c : static_cardinalities) {
      if (c == 0) throw InvalidArgument("embedding cardinality must be positive");
    }
    if (n_categorical() > 0 && embedding_dim == 0) throw InvalidArgument("embedding dimension must be positive");
  }

  friend bool operator==(const FGamConfig&, const FGamConfig&) = default;
};

struct FGamParams {
  FGamConfig config;
  std::vector<Mlp> feature_nets;
  std::vector<EmbeddingTable> embeddings;
  Mlp trunk;
  DenseLayer weight_head;
  DenseLayer bias_head;

  std::size_t penultimate_width() const {
    return trunk.layers.empty() ? config.trunk_input_width() : trunk.out_width();
  }

  friend bool operator==(const FGamParams&, const FGamParams&) = default;
};

// Named view of one parameter array; used by optimizers, grad checks and
// persistence. Views follow a fixed order so flattened layouts are stable.
struct ParamView {
  std::string name;
  std::span<double> values;
  bool trainable = true;
};

struct ConstParamView {
  std::string name;
  std::span<const double> values;
  bool trainable = true;
};

namespace detail {

template <class Params, class View>
std::vector<View> collect_views(Params& p) {
  std::vector<View> out;
  const bool f_trainable = !p.config.frozen_identity_features;
  auto add_layer = [&](const std::string& prefix, auto& layer, bool trainable) {
    out.push_back(View{prefix + ".weight", layer.weight.values(), trainable});
    out.push_back(View{prefix + ".bias", std::span(layer.bias), trainable});
  };
  for (std::size_t t = 0; t < p.feature_nets.size(); ++t) {
    for (std::size_t l = 0; l < p.feature_nets[t].layers.size(); ++l) {
      add_layer("f" + std::to_string(t) + ".layer" + std::to_string(l), p.feature_nets[t].layers[l],
                f_trainable);
    }
  }
  for (std::size_t e = 0; e < p.embeddings.size(); ++e) {
    out.push_back(View{"embedding" + std::to_string(e), p.embeddings[e].vectors.values(), true});
  }
  for (std::size_t l = 0; l < p.trunk.layers.size(); ++l) {
    add_layer("trunk.layer" + std::to_string(l), p.trunk.layers[l], true);
  }
  add_layer("weight_head", p.weight_head, true);
  add_layer("bias_head", p.bias_head, true);
  return out;
}

}  // namespace detail

inline std::vector<ParamView> parameter_views(FGamParams& p) {
  return detail::collect_views<FGamParams, ParamView>(p);
}

inline std::vector<ConstParamView> parameter_views(const FGamParams& p) {
  return detail::collect_views<const FGamParams, ConstParamView>(p);
}

inline std::size_t parameter_count(const FGamParams& p) {
  std::size_t n = 0;
  for (const auto& v : parameter_views(p)) n += v.values.size();
  return n;
}

// Same structure as `p` with every array zeroed; gradient container.
inline FGamParams zeros_like(const FGamParams& p) {
  FGamParams z = p;
  for (auto& v : parameter_views(z)) std::fill(v.values.begin(), v.values.end(), 0.0);
  return z;
}

inline Mlp identity_feature_net() {
  Mlp m;
  DenseLayer layer;
  layer.weight = Matrix{{1.0}};
  layer.bias = {0.0};
  layer.activation = Activation::identity;
  m.layers.push_back(std::move(layer));
  return m;
}

// Seeded initialization. With no static inputs the trunk is dropped and the
// heads have zero input width, so w_t and w_0 reduce to learned constants.
inline FGamParams init_params(const FGamConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  FGamParams p;
  p.config = config;

  for (std::size_t t = 0; t < config.d_tv; ++t) {
    if (config.frozen_identity_features) {
      p.feature_nets.push_back(identity_feature_net());
      continue;
    }
    std::vector<std::size_t> widths(config.dnnn_depth - 1, config.dnnn_width);
    widths.push_back(1);
    p.feature_nets.push_back(make_mlp(1, widths, Activation::relu, Activation::identity, config.dropout_rate, rng));
  }
  for (std::size_t c : config.static_cardinalities) {
    p.embeddings.push_back(make_embedding(c, config.embedding_dim, rng));
  }
  if (config.d_static() > 0 && !config.trunk_widths.empty()) {
    p.trunk = make_mlp(config.trunk_input_width(), config.trunk_widths, Activation::relu, Activation::relu,
                       config.trunk_dropout ? config.dropout_rate : 0.0, rng);
  }
  const std::size_t pen = config.d_static() > 0 ? p.penultimate_width() : 0;
  p.weight_head = make_dense(pen, config.d_tv, Activation::identity, rng);
  p.bias_head = make_dense(pen, 1, Activation::identity, rng);
  if (pen == 0) std::fill(p.weight_head.bias.begin(), p.weight_head.bias.end(), 1.0);
  return p;
}

// Builds the parameter layout for the two reduced forms: no statics (w_t
// and w_0 are constants) or no time-varying features (a plain network on
// the statics).
inline FGamParams make_degenerate(const FGamConfig& config, std::uint64_t seed) {
  if (config.d_static() == 0 && config.d_tv == 0) throw InvalidArgument("model needs static or time-varying inputs");
  if (config.d_static() != 0 && config.d_tv != 0) {
    throw InvalidArgument("degenerate layout requires no static or no time-varying inputs");
  }
  return init_params(config, seed);
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Activations of one forward pass over a batch, kept for backward.
struct ForwardState {
  std::size_t rows = 0;
  Matrix trunk_input;
  std::vector<std::vector<std::size_t>> table_indices;
  MlpForward trunk;
  Matrix penultimate;
  Matrix weights;             // n x d_tv, w_t(x_s)
  std::vector<double> bias;   // w_0(x_s)
  std::vector<MlpForward> feature_fwd;
  Matrix features;            // n x d_tv, f_t(x_t)
  std::vector<double> logits;
};

inline void check_input(const FGamParams& p, const ModelInput& in) {
  in.validate();
  const auto& c = p.config;
  if (in.static_numeric.cols() != c.static_numeric) {
    throw DimensionError("expected " + std::to_string(c.static_numeric) + " numeric static columns, got " +
                         std::to_string(in.static_numeric.cols()));
  }
  if (in.n_categorical != c.n_categorical()) {
    throw DimensionError("expected " + std::to_string(c.n_categorical()) + " categorical static columns, got " +
                         std::to_string(in.n_categorical));
  }
  if (in.tv.cols() != c.d_tv) {
    throw DimensionError("expected " + std::to_string(c.d_tv) + " time-varying columns, got " +
                         std::to_string(in.tv.cols()));
  }
  require_finite(in.static_numeric, "static inputs");
  require_finite(in.tv, "time-varying inputs");
  for (std::size_t r = 0; r < in.rows(); ++r) {
    auto codes = in.codes(r);
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (codes[j] >= c.static_cardinalities[j]) {
        throw InvalidArgument("category code " + std::to_string(codes[j]) + " invalid for categorical static " +
                              std::to_string(j));
      }
    }
  }
}

namespace detail {

// Static half of the forward pass: trunk, weight head, bias head.
inline void forward_static(const FGamParams& p, const ModelInput& in, Mode mode, Rng* rng, ForwardState& s) {
  const auto& c = p.config;
  const std::size_t n = in.rows();
  if (c.d_static() == 0) {
    s.penultimate = Matrix(n, 0);
  } else {
    std::vector<Matrix> embedded;
    s.table_indices.assign(c.n_categorical(), std::vector<std::size_t>(n));
    for (std::size_t j = 0; j < c.n_categorical(); ++j) {
      for (std::size_t r = 0; r < n; ++r) s.table_indices[j][r] = in.codes(r)[j];
      embedded.push_back(embedding_forward(p.embeddings[j], s.table_indices[j]));
    }
    std::vector<const Matrix*> parts{&in.static_numeric};
    for (const auto& e : embedded) parts.push_back(&e);
    s.trunk_input = hconcat(parts, n);
    s.trunk = mlp_forward(p.trunk, s.trunk_input, mode, rng);
    s.penultimate = s.trunk.outputs;
  }
  s.weights = dense_affine(p.weight_head, s.penultimate);
  const Matrix b = dense_affine(p.bias_head, s.penultimate);
  s.bias.assign(b.values().begin(), b.values().end());
  require_finite(s.weights, "weight head");
  require_finite(b, "bias head");
}

}  // namespace detail

inline ForwardState forward_batch(const FGamParams& p, const ModelInput& in, Mode mode, Rng* rng = nullptr) {
  check_input(p, in);
  const auto& c = p.config;
  const std::size_t n = in.rows();
  ForwardState s;
  s.rows = n;
  detail::forward_static(p, in, mode, rng, s);

  s.features = Matrix(n, c.d_tv);
  for (std::size_t t = 0; t < c.d_tv; ++t) {
    s.feature_fwd.push_back(mlp_forward(p.feature_nets[t], column(in.tv, t), mode, rng));
    for (std::size_t r = 0; r < n; ++r) s.features(r, t) = s.feature_fwd.back().outputs(r, 0);
  }
  s.logits.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double z = s.bias[r];
    for (std::size_t t = 0; t < c.d_tv; ++t) z += s.weights(r, t) * s.features(r, t);
    if (!std::isfinite(z)) throw NonFiniteError("non-finite logit");
    s.logits[r] = z;
  }
  return s;
}

inline std::vector<double> predict_proba(const FGamParams& p, const ModelInput& in) {
  const auto s = forward_batch(p, in, Mode::eval);
  std::vector<double> out(s.logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(s.logits[i]);
  return out;
}

inline double forward(const FGamParams& p, const Example& x, Mode mode = Mode::eval, Rng* rng = nullptr) {
  return sigmoid(forward_batch(p, x.as_batch(), mode, rng).logits[0]);
}

// w_t(x_s) for every t and w_0(x_s); depends on static inputs only.
struct StaticWeights {
  std::vector<double> weights;
  double bias = 0.0;
};

inline StaticWeights static_weights(const FGamParams& p, const Example& x) {
  auto in = x.as_batch();
  check_input(p, in);
  ForwardState s;
  detail::forward_static(p, in, Mode::eval, nullptr, s);
  StaticWeights out;
  out.weights.assign(s.weights.values().begin(), s.weights.values().end());
  out.bias = s.bias[0];
  return out;
}

// f_t evaluated on a batch of standardized values.
inline std::vector<double> feature_transform(const FGamParams& p, std::size_t t, std::span<const double> values) {
  if (t >= p.config.d_tv) throw InvalidArgument("time-varying feature index " + std::to_string(t) + " out of range");
  const auto fwd = mlp_forward(p.feature_nets[t], Matrix::from_values(values.size(), 1, {values.begin(), values.end()}),
                               Mode::eval);
  return {fwd.outputs.values().begin(), fwd.outputs.values().end()};
}

struct ContributionReport {
  double bias = 0.0;
  std::vector<double> contributions;
  double logit = 0.0;
  double probability = 0.5;
  // Same decomposition re-centered so each c_t is zero at the training mean
  // (standardized value 0); the shift is folded into the displayed bias.
  double display_bias = 0.0;
  std::vector<double> display_contributions;
};

inline ContributionReport contributions(const FGamParams& p, const Example& x) {
  const auto s = forward_batch(p, x.as_batch(), Mode::eval);
  const std::size_t d = p.config.d_tv;
  ContributionReport rep;
  rep.bias = s.bias[0];
  rep.contributions.resize(d);
  for (std::size_t t = 0; t < d; ++t) rep.contributions[t] = s.weights(0, t) * s.features(0, t);
  rep.logit = s.logits[0];
  rep.probability = sigmoid(rep.logit);

  rep.display_bias = rep.bias;
  rep.display_contributions.resize(d);
  const double zero = 0.0;
  for (std::size_t t = 0; t < d; ++t) {
    const double at_mean = s.weights(0, t) * feature_transform(p, t, std::span(&zero, 1))[0];
    rep.display_contributions[t] = rep.contributions[t] - at_mean;
    rep.display_bias += at_mean;
  }
  return rep;
}

struct CurvePoint {
  double value = 0.0;         // standardized feature value
  double contribution = 0.0;  // w_t(x_s) * f_t(value)
};

// Sweeps feature t over `grid` with every other input held fixed.
inline std::vector<CurvePoint> contribution_curve(const FGamParams& p, const Example& x, std::size_t t,
                                                  std::span<const double> grid) {
  if (t >= p.config.d_tv) throw InvalidArgument("time-varying feature index " + std::to_string(t) + " out of range");
  const double w = static_weights(p, x).weights[t];
  const auto f = feature_transform(p, t, grid);
  std::vector<CurvePoint> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = {grid[i], w * f[i]};
  return out;
}

struct LossAndGrad {
  double loss = 0.0;
  FGamParams grad;
};

inline double clipped_log_loss(double prob, int label, double pos_weight = 1.0) {
  constexpr double kEps = 1e-12;
  const double q = std::min(std::max(prob, kEps), 1.0 - kEps);
  return label == 1 ? -pos_weight * std::log(q) : -std::log(1.0 - q);
}

// Mean (optionally positive-weighted) cross-entropy and its exact gradient
// through every component of the model.
inline LossAndGrad loss_and_gradient(const FGamParams& p, const ModelInput& in, std::span<const int> labels,
                                     Mode mode = Mode::eval, Rng* rng = nullptr, double pos_weight = 1.0) {
  const std::size_t n = in.rows();
  if (n == 0) throw InvalidArgument("empty batch");
  if (labels.size() != n) throw DimensionError("label count does not match batch rows");
  const auto s = forward_batch(p, in, mode, rng);
  const auto& c = p.config;

  LossAndGrad out;
  out.grad = zeros_like(p);
  FGamParams& g = out.grad;

  // dL/dlogit per row.
  std::vector<double> dz(n);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] != 0 && labels[r] != 1) throw InvalidArgument("labels must be 0 or 1");
    const double prob = sigmoid(s.logits[r]);
    loss += clipped_log_loss(prob, labels[r], pos_weight);
    dz[r] = (labels[r] == 1 ? pos_weight * (prob - 1.0) : prob) / static_cast<double>(n);
  }
  out.loss = loss / static_cast<double>(n);

  Matrix d_weights(n, c.d_tv);
  Matrix d_bias(n, 1);
  for (std::size_t r = 0; r < n; ++r) {
    d_bias(r, 0) = dz[r];
    for (std::size_t t = 0; t < c.d_tv; ++t) d_weights(r, t) = dz[r] * s.features(r, t);
  }

  for (std::size_t t = 0; t < c.d_tv; ++t) {
    Matrix df(n, 1);
    for (std::size_t r = 0; r < n; ++r) df(r, 0) = dz[r] * s.weights(r, t);
    auto fb = mlp_backward(p.feature_nets[t], s.feature_fwd[t].cache, df);
    for (std::size_t l = 0; l < fb.layer_grads.size(); ++l) {
      g.feature_nets[t].layers[l].weight = std::move(fb.layer_grads[l].weight);
      g.feature_nets[t].layers[l].bias = std::move(fb.layer_grads[l].bias);
    }
  }

  LayerGrad wg, bg;
  Matrix dh = detail::dense_backward(p.weight_head, s.penultimate, s.weights, d_weights, wg);
  Matrix dh_bias = detail::dense_backward(p.bias_head, s.penultimate, d_bias, d_bias, bg);
  g.weight_head.weight = std::move(wg.weight);
  g.weight_head.bias = std::move(wg.bias);
  g.bias_head.weight = std::move(bg.weight);
  g.bias_head.bias = std::move(bg.bias);

  if (c.d_static() > 0) {
    for (std::size_t i = 0; i < dh.size(); ++i) dh.values()[i] += dh_bias.values()[i];
    auto tb = mlp_backward(p.trunk, s.trunk.cache, dh);
    for (std::size_t l = 0; l < tb.layer_grads.size(); ++l) {
      g.trunk.layers[l].weight = std::move(tb.layer_grads[l].weight);
      g.trunk.layers[l].bias = std::move(tb.layer_grads[l].bias);
    }
    const Matrix& dx = tb.in_grad;
    for (std::size_t j = 0; j < c.n_categorical(); ++j) {
      Matrix de(n, c.embedding_dim);
      const std::size_t offset = c.static_numeric + j * c.embedding_dim;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < c.embedding_dim; ++k) de(r, k) = dx(r, offset + k);
      }
      g.embeddings[j].vectors = embedding_backward(p.embeddings[j], s.table_indices[j], de);
    }
  }
  return out;
}

}  // namespace fgam
