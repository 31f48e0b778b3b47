#include "fgam/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace fgam {
namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double relu(double z) { return z > 0 ? z : 0.0; }

// Hand-set tiny model: one numeric static, two time-varying features,
// feature nets 1 -> 2 (relu) -> 1, trunk 1 -> 2 (relu), linear heads.
struct TinyModel {
  double f_w1[2][2] = {{1.2, -0.7}, {-0.4, 0.9}};  // [t][unit]
  double f_b1[2][2] = {{0.1, 0.3}, {0.2, -0.1}};
  double f_w2[2][2] = {{0.8, -1.1}, {1.5, 0.6}};
  double f_b2[2] = {0.05, -0.2};
  double trunk_w[2] = {0.9, -1.3};
  double trunk_b[2] = {0.2, 0.4};
  double head_w[2][2] = {{0.7, 0.3}, {-0.5, 1.1}};  // [t][unit]
  double head_b[2] = {0.1, -0.3};
  double bias_w[2] = {0.25, -0.6};
  double bias_b = -0.15;

  FGamParams params() const {
    FGamConfig c;
    c.static_numeric = 1;
    c.d_tv = 2;
    c.dnnn_depth = 2;
    c.dnnn_width = 2;
    c.trunk_widths = {2};
    c.dropout_rate = 0.0;
    FGamParams p = init_params(c, 0);
    for (int t = 0; t < 2; ++t) {
      auto& l0 = p.feature_nets[t].layers[0];
      auto& l1 = p.feature_nets[t].layers[1];
      for (int u = 0; u < 2; ++u) {
        l0.weight(u, 0) = f_w1[t][u];
        l0.bias[u] = f_b1[t][u];
        l1.weight(0, u) = f_w2[t][u];
      }
      l1.bias[0] = f_b2[t];
    }
    for (int u = 0; u < 2; ++u) {
      p.trunk.layers[0].weight(u, 0) = trunk_w[u];
      p.trunk.layers[0].bias[u] = trunk_b[u];
      p.bias_head.weight(0, u) = bias_w[u];
      for (int t = 0; t < 2; ++t) p.weight_head.weight(t, u) = head_w[t][u];
    }
    p.weight_head.bias = {head_b[0], head_b[1]};
    p.bias_head.bias = {bias_b};
    return p;
  }

  double f(int t, double x) const {
    double out = f_b2[t];
    for (int u = 0; u < 2; ++u) out += f_w2[t][u] * relu(f_w1[t][u] * x + f_b1[t][u]);
    return out;
  }
  double h(int u, double s) const { return relu(trunk_w[u] * s + trunk_b[u]); }
  double w(int t, double s) const { return head_w[t][0] * h(0, s) + head_w[t][1] * h(1, s) + head_b[t]; }
  double w0(double s) const { return bias_w[0] * h(0, s) + bias_w[1] * h(1, s) + bias_b; }
  double logit(double s, double x0, double x1) const { return w0(s) + w(0, s) * f(0, x0) + w(1, s) * f(1, x1); }
};

FGamConfig mixed_config() {
  FGamConfig c;
  c.static_numeric = 2;
  c.static_cardinalities = {3, 4};
  c.embedding_dim = 2;
  c.d_tv = 3;
  c.dnnn_depth = 3;
  c.dnnn_width = 4;
  c.trunk_widths = {6, 5};
  c.dropout_rate = 0.0;
  return c;
}

void jitter(FGamParams& p, Rng& rng, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  for (auto& v : parameter_views(p)) {
    if (!v.trainable) continue;
    for (double& x : v.values) x += n(rng);
  }
}

ModelInput random_input(const FGamConfig& c, std::size_t n, Rng& rng) {
  std::normal_distribution<double> norm(0.0, 1.0);
  ModelInput in;
  in.static_numeric = Matrix(n, c.static_numeric);
  for (double& v : in.static_numeric.values()) v = norm(rng);
  in.n_categorical = c.n_categorical();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < c.n_categorical(); ++j) {
      in.static_codes.push_back(std::uniform_int_distribution<std::size_t>(0, c.static_cardinalities[j] - 1)(rng));
    }
  }
  in.tv = Matrix(n, c.d_tv);
  for (double& v : in.tv.values()) v = norm(rng);
  return in;
}

std::vector<int> random_labels(std::size_t n, Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = std::bernoulli_distribution(0.4)(rng) ? 1 : 0;
  return y;
}

double model_grad_error(FGamParams& p, const ModelInput& in, const std::vector<int>& y) {
  const auto lg = loss_and_gradient(p, in, y);
  auto views = parameter_views(p);
  const auto gviews = parameter_views(std::as_const(lg.grad));
  std::vector<ParamRef> refs;
  for (std::size_t i = 0; i < views.size(); ++i) refs.push_back({views[i].values, gviews[i].values});
  return grad_check([&] { return loss_and_gradient(p, in, y).loss; }, refs, 1e-5);
}

TEST(Forward, ZeroNetworkGivesHalf) {
  FGamParams p = init_params(mixed_config(), 3);
  for (auto& v : parameter_views(p)) std::fill(v.values.begin(), v.values.end(), 0.0);
  Rng rng(1);
  const auto in = random_input(p.config, 5, rng);
  for (double prob : predict_proba(p, in)) EXPECT_EQ(prob, 0.5);
}

TEST(Forward, HandSetLinearCase) {
  FGamConfig c;
  c.d_tv = 1;
  c.frozen_identity_features = true;
  FGamParams p = init_params(c, 0);
  p.weight_head.bias = {2.0};
  p.bias_head.bias = {-1.0};
  Example x;
  x.tv = {0.5};
  EXPECT_DOUBLE_EQ(forward(p, x), 0.5);
}

TEST(Forward, TinyModelMatchesStraightLineOracle) {
  const TinyModel tiny;
  const FGamParams p = tiny.params();
  const double cases[][3] = {{0.3, -1.0, 2.0}, {-1.5, 0.4, 0.1}, {2.2, 1.7, -0.8}, {0.0, 0.0, 0.0}};
  for (const auto& cs : cases) {
    Example x{{cs[0]}, {}, {cs[1], cs[2]}};
    EXPECT_NEAR(forward(p, x), sig(tiny.logit(cs[0], cs[1], cs[2])), 1e-12);
  }
}

TEST(Forward, DimensionMismatchAndBadCodeThrow) {
  FGamParams p = init_params(mixed_config(), 1);
  Example bad_tv{{0.0, 0.0}, {0, 0}, {1.0}};
  EXPECT_THROW(forward(p, bad_tv), DimensionError);
  Example bad_code{{0.0, 0.0}, {3, 0}, {0.0, 0.0, 0.0}};
  EXPECT_THROW(forward(p, bad_code), InvalidArgument);
  Example missing_cat{{0.0, 0.0}, {0}, {0.0, 0.0, 0.0}};
  EXPECT_THROW(forward(p, missing_cat), DimensionError);
}

TEST(Contributions, TinyModelFactorsMatchOracle) {
  const TinyModel tiny;
  const FGamParams p = tiny.params();
  Example x{{0.7}, {}, {-0.3, 1.4}};
  const auto rep = contributions(p, x);
  ASSERT_EQ(rep.contributions.size(), 2u);
  EXPECT_NEAR(rep.contributions[0], tiny.w(0, 0.7) * tiny.f(0, -0.3), 1e-12);
  EXPECT_NEAR(rep.contributions[1], tiny.w(1, 0.7) * tiny.f(1, 1.4), 1e-12);
  EXPECT_NEAR(rep.bias, tiny.w0(0.7), 1e-12);
  EXPECT_EQ(rep.probability, forward(p, x));
}

TEST(Contributions, NoTimeVaryingReducesToNetworkOnStatics) {
  FGamConfig c = mixed_config();
  c.d_tv = 0;
  FGamParams p = make_degenerate(c, 4);
  Example x{{0.2, -0.4}, {1, 2}, {}};
  const auto rep = contributions(p, x);
  EXPECT_TRUE(rep.contributions.empty());
  EXPECT_EQ(rep.logit, rep.bias);
}

TEST(Contributions, AdditivityHoldsOnRandomInputs) {
  Rng rng(8);
  FGamParams p = init_params(mixed_config(), 8);
  jitter(p, rng, 0.2);
  const auto in = random_input(p.config, 200, rng);
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const auto rep = contributions(p, example_at(in, r));
    const double sum = std::accumulate(rep.contributions.begin(), rep.contributions.end(), rep.bias);
    EXPECT_NEAR(sum, rep.logit, 1e-9);
    const double disp = std::accumulate(rep.display_contributions.begin(), rep.display_contributions.end(),
                                        rep.display_bias);
    EXPECT_NEAR(disp, rep.logit, 1e-9);
  }
}

TEST(Contributions, DisplayCentersAtMean) {
  Rng rng(9);
  FGamParams p = init_params(mixed_config(), 9);
  jitter(p, rng, 0.2);
  Example x = example_at(random_input(p.config, 1, rng), 0);
  std::fill(x.tv.begin(), x.tv.end(), 0.0);
  const auto rep = contributions(p, x);
  for (double c : rep.display_contributions) EXPECT_NEAR(c, 0.0, 1e-15);
  EXPECT_NEAR(rep.display_bias, rep.logit, 1e-12);
}

TEST(Curve, ConstantFeatureNetIsFlat) {
  FGamConfig c = mixed_config();
  FGamParams p = init_params(c, 2);
  auto& last = p.feature_nets[1].layers.back();
  last.weight.fill(0.0);
  last.bias = {0.75};
  Rng rng(2);
  const Example x = example_at(random_input(c, 1, rng), 0);
  const double w = static_weights(p, x).weights[1];
  const std::vector<double> grid{-2.0, -1.0, 0.0, 1.0, 2.0};
  for (const auto& pt : contribution_curve(p, x, 1, grid)) EXPECT_EQ(pt.contribution, w * 0.75);
}

TEST(Curve, ProportionalWeightsScaleCurves) {
  // Trunk-free model: w_t is linear in the single static, so w(2) = 2 w(1).
  FGamConfig c;
  c.static_numeric = 1;
  c.d_tv = 2;
  c.trunk_widths = {};
  c.dropout_rate = 0.0;
  FGamParams p = init_params(c, 5);
  p.weight_head.weight = Matrix{{1.5}, {-0.8}};
  p.weight_head.bias = {0.0, 0.0};
  Example a{{2.0}, {}, {0.1, 0.2}};
  Example b{{1.0}, {}, {0.1, 0.2}};
  std::vector<double> grid(21);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -2.0 + 0.2 * static_cast<double>(i);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto ca = contribution_curve(p, a, t, grid);
    const auto cb = contribution_curve(p, b, t, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(ca[i].contribution, 2.0 * cb[i].contribution, 1e-14);
  }
}

TEST(Curve, FiftyPointsMatchOracleAndContributions) {
  const TinyModel tiny;
  const FGamParams p = tiny.params();
  Example x{{-0.4}, {}, {0.5, -1.0}};
  std::vector<double> grid(50);
  for (int i = 0; i < 50; ++i) grid[i] = -3.0 + 6.0 * i / 49.0;
  const auto curve = contribution_curve(p, x, 0, grid);
  ASSERT_EQ(curve.size(), 50u);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(curve[i].value, grid[i]);
    EXPECT_NEAR(curve[i].contribution, tiny.w(0, -0.4) * tiny.f(0, grid[i]), 1e-12);
  }
  // Endpoint consistency with contributions().
  Example at_end = x;
  at_end.tv[0] = grid.back();
  EXPECT_EQ(curve.back().contribution, contributions(p, at_end).contributions[0]);
  EXPECT_THROW(contribution_curve(p, x, 2, grid), InvalidArgument);
}

TEST(Backward, SaturatedSigmoidVanishes) {
  FGamConfig c;
  c.d_tv = 1;
  c.frozen_identity_features = true;
  FGamParams p = init_params(c, 0);
  p.weight_head.bias = {50.0};
  ModelInput in;
  in.static_numeric = Matrix(2, 0);
  in.tv = Matrix{{1.0}, {-1.0}};
  const std::vector<int> y{1, 0};
  const auto lg = loss_and_gradient(p, in, y);
  for (const auto& v : parameter_views(std::as_const(lg.grad))) {
    for (double g : v.values) EXPECT_LT(std::abs(g), 1e-6);
  }
}

TEST(Backward, LogisticSpecialCaseByHand) {
  FGamConfig c;
  c.d_tv = 1;
  c.frozen_identity_features = true;
  FGamParams p = init_params(c, 0);
  p.weight_head.bias = {0.8};
  p.bias_head.bias = {-0.2};
  ModelInput in;
  in.static_numeric = Matrix(1, 0);
  in.tv = Matrix{{1.5}};
  const std::vector<int> y{1};
  const double prob = sig(0.8 * 1.5 - 0.2);
  const auto lg = loss_and_gradient(p, in, y);
  EXPECT_NEAR(lg.grad.weight_head.bias[0], (prob - 1.0) * 1.5, 1e-15);
  EXPECT_NEAR(lg.grad.bias_head.bias[0], prob - 1.0, 1e-15);
  EXPECT_NEAR(lg.loss, -std::log(prob), 1e-15);
}

TEST(Backward, EightRowGradCheck) {
  Rng rng(17);
  FGamParams p = init_params(mixed_config(), 17);
  jitter(p, rng, 0.1);
  const auto in = random_input(p.config, 8, rng);
  const auto y = random_labels(8, rng);
  EXPECT_LT(model_grad_error(p, in, y), 1e-5);
}

TEST(Backward, GradientExactAcrossRandomDraws) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    Rng rng(seed);
    FGamConfig c = mixed_config();
    c.trunk_widths = {std::size_t(3 + seed % 4)};
    c.dnnn_depth = 2 + seed % 3;
    FGamParams p = init_params(c, seed);
    jitter(p, rng, 0.1);
    const auto in = random_input(c, 6, rng);
    const auto y = random_labels(6, rng);
    EXPECT_LT(model_grad_error(p, in, y), 1e-5) << "seed " << seed;
  }
}

TEST(Backward, PositiveClassWeight) {
  FGamConfig c;
  c.d_tv = 1;
  c.frozen_identity_features = true;
  FGamParams p = init_params(c, 0);
  ModelInput in;
  in.static_numeric = Matrix(1, 0);
  in.tv = Matrix{{0.0}};
  const std::vector<int> y{1};
  const auto plain = loss_and_gradient(p, in, y);
  const auto weighted = loss_and_gradient(p, in, y, Mode::eval, nullptr, 3.0);
  EXPECT_NEAR(weighted.loss, 3.0 * plain.loss, 1e-15);
  EXPECT_NEAR(weighted.grad.bias_head.bias[0], 3.0 * plain.grad.bias_head.bias[0], 1e-15);
}

TEST(Backward, EmptyBatchAndBadLabelsThrow) {
  FGamParams p = init_params(mixed_config(), 1);
  Rng rng(1);
  const auto in = random_input(p.config, 2, rng);
  EXPECT_THROW(loss_and_gradient(p, in, std::vector<int>{1}), DimensionError);
  EXPECT_THROW(loss_and_gradient(p, in, std::vector<int>{1, 2}), InvalidArgument);
  EXPECT_THROW(loss_and_gradient(p, in.subset(std::vector<std::size_t>{}), std::vector<int>{}), InvalidArgument);
}

TEST(Degenerate, NoStaticsParameterCensus) {
  FGamConfig c;
  c.d_tv = 3;
  FGamParams p = make_degenerate(c, 0);
  EXPECT_EQ(p.feature_nets.size(), 3u);
  EXPECT_TRUE(p.trunk.layers.empty());
  EXPECT_TRUE(p.embeddings.empty());
  EXPECT_EQ(p.weight_head.weight.size(), 0u);
  EXPECT_EQ(p.bias_head.weight.size(), 0u);
  EXPECT_EQ(p.weight_head.bias.size() + p.bias_head.bias.size(), 4u);
}

TEST(Degenerate, NoStaticsMatchesIndependentDelrForward) {
  FGamConfig c;
  c.d_tv = 3;
  c.dnnn_depth = 3;
  c.dnnn_width = 5;
  Rng rng(21);
  FGamParams p = make_degenerate(c, 21);
  jitter(p, rng, 0.3);

  // sigma(w_0 + sum_t w_t f_t(x_t)) coded directly from the raw arrays.
  auto delr = [&](const std::vector<double>& x) {
    double z = p.bias_head.bias[0];
    for (std::size_t t = 0; t < 3; ++t) {
      std::vector<double> a{x[t]};
      for (const auto& layer : p.feature_nets[t].layers) {
        std::vector<double> next(layer.out_width());
        for (std::size_t o = 0; o < next.size(); ++o) {
          double acc = layer.bias[o];
          for (std::size_t k = 0; k < a.size(); ++k) acc += layer.weight(o, k) * a[k];
          next[o] = layer.activation == Activation::relu ? relu(acc) : acc;
        }
        a = next;
      }
      z += p.weight_head.bias[t] * a[0];
    }
    return sig(z);
  };
  std::normal_distribution<double> n(0.0, 1.5);
  for (int i = 0; i < 200; ++i) {
    Example x{{}, {}, {n(rng), n(rng), n(rng)}};
    EXPECT_NEAR(forward(p, x), delr(x.tv), 1e-12);
  }
}

TEST(Degenerate, FrozenIdentityIsLogisticRegression) {
  FGamConfig c;
  c.d_tv = 4;
  c.frozen_identity_features = true;
  FGamParams p = make_degenerate(c, 0);
  const std::vector<double> w{0.5, -1.2, 2.0, 0.3};
  p.weight_head.bias = w;
  p.bias_head.bias = {-0.7};
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Example x{{}, {}, {n(rng), n(rng), n(rng), n(rng)}};
    double z = -0.7;
    for (int t = 0; t < 4; ++t) z += w[t] * x.tv[t];
    EXPECT_NEAR(forward(p, x), sig(z), 1e-12);
  }
  for (const auto& v : parameter_views(p)) {
    if (v.name.rfind("f", 0) == 0) {
      EXPECT_FALSE(v.trainable) << v.name;
    }
  }
}

TEST(Degenerate, NoTimeVaryingDependsOnlyOnStatics) {
  FGamConfig c = mixed_config();
  c.d_tv = 0;
  FGamParams p = make_degenerate(c, 6);
  Rng rng(6);
  const auto in = random_input(c, 10, rng);
  const auto probs = predict_proba(p, in);
  EXPECT_EQ(probs.size(), 10u);
  for (std::size_t r = 0; r < 10; ++r) EXPECT_EQ(probs[r], forward(p, example_at(in, r)));
}

TEST(Degenerate, RejectsInvalidLayouts) {
  EXPECT_THROW(make_degenerate(FGamConfig{}, 0), InvalidArgument);
  EXPECT_THROW(make_degenerate(mixed_config(), 0), InvalidArgument);
}

TEST(Properties, StaticOnlyDependenceAndLocality) {
  Rng rng(31);
  FGamParams p = init_params(mixed_config(), 31);
  jitter(p, rng, 0.2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Example x = example_at(random_input(p.config, 1, rng), 0);
    const std::size_t t = static_cast<std::size_t>(trial) % p.config.d_tv;
    Example y = x;
    y.tv[t] += n(rng);
    const auto sw_x = static_weights(p, x);
    const auto sw_y = static_weights(p, y);
    EXPECT_EQ(sw_x.weights, sw_y.weights);
    EXPECT_EQ(sw_x.bias, sw_y.bias);
    const auto rx = contributions(p, x);
    const auto ry = contributions(p, y);
    EXPECT_EQ(rx.bias, ry.bias);
    for (std::size_t s = 0; s < p.config.d_tv; ++s) {
      if (s != t) {
        EXPECT_EQ(rx.contributions[s], ry.contributions[s]);
      }
    }
  }
}

TEST(Properties, LogitAndProbabilityRankTogether) {
  Rng rng(41);
  FGamParams p = init_params(mixed_config(), 41);
  jitter(p, rng, 0.3);
  const auto in = random_input(p.config, 300, rng);
  const auto s = forward_batch(p, in, Mode::eval);
  const auto probs = predict_proba(p, in);
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (s.logits[i] > s.logits[i - 1]) {
      EXPECT_GE(probs[i], probs[i - 1]);
    } else if (s.logits[i] < s.logits[i - 1]) {
      EXPECT_LE(probs[i], probs[i - 1]);
    }
  }
}

TEST(Params, InitIsSeededAndViewsAreStable) {
  const FGamConfig c = mixed_config();
  EXPECT_EQ(init_params(c, 5), init_params(c, 5));
  EXPECT_NE(init_params(c, 5), init_params(c, 6));
  FGamParams p = init_params(c, 5);
  const auto views = parameter_views(p);
  EXPECT_EQ(views.front().name, "f0.layer0.weight");
  EXPECT_EQ(views.back().name, "bias_head.bias");
  EXPECT_GT(parameter_count(p), 0u);
}

}  // namespace
}  // namespace fgam
