#pragma once

// Synthetic cohorts drawn from a known factored model:
//
//   z_t   = (x_t - loc_t) / scale_t
//   logit = w0*(s) + sum_t w*_t(s) f*_t(z_t)
//   y     ~ Bernoulli(sigmoid(logit))
//
// where s are the numeric statics. The truth is kept so that tests can
// compare fitted shapes, weights and scores against the generator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fgam/data/dataset.hpp"
#include "fgam/data/schema.hpp"
#include "fgam/error.hpp"
#include "fgam/model.hpp"
#include "json.hpp"

namespace fgam::data {

enum class ShapeFamily { quadratic, sigmoid_bump, piecewise_linear, monotone };
enum class WeightFamily { constant, linear, relu_linear };

inline std::string to_string(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::quadratic: return "quadratic";
    case ShapeFamily::sigmoid_bump: return "sigmoid_bump";
    case ShapeFamily::piecewise_linear: return "piecewise_linear";
    case ShapeFamily::monotone: return "monotone";
  }
  return "quadratic";
}

inline ShapeFamily shape_from_string(const std::string& s) {
  if (s == "quadratic") return ShapeFamily::quadratic;
  if (s == "sigmoid_bump") return ShapeFamily::sigmoid_bump;
  if (s == "piecewise_linear") return ShapeFamily::piecewise_linear;
  if (s == "monotone") return ShapeFamily::monotone;
  throw InvalidArgument("unknown shape family '" + s + "'");
}

inline std::string to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::constant: return "constant";
    case WeightFamily::linear: return "linear";
    case WeightFamily::relu_linear: return "relu_linear";
  }
  return "constant";
}

inline WeightFamily weight_from_string(const std::string& s) {
  if (s == "constant") return WeightFamily::constant;
  if (s == "linear") return WeightFamily::linear;
  if (s == "relu_linear") return WeightFamily::relu_linear;
  throw InvalidArgument("unknown weight family '" + s + "'");
}

// quadratic:        a (z - b)^2
// sigmoid_bump:     a [sigmoid(4(z - b + c)) - sigmoid(4(z - b - c))]
// piecewise_linear: a max(0, z - b) + c min(0, z - b)
// monotone:         a tanh(c (z - b))
struct ShapeSpec {
  ShapeFamily family = ShapeFamily::quadratic;
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;

  double operator()(double z) const {
    switch (family) {
      case ShapeFamily::quadratic: return a * (z - b) * (z - b);
      case ShapeFamily::sigmoid_bump: return a * (sigmoid(4.0 * (z - b + c)) - sigmoid(4.0 * (z - b - c)));
      case ShapeFamily::piecewise_linear: return a * std::max(0.0, z - b) + c * std::min(0.0, z - b);
      case ShapeFamily::monotone: return a * std::tanh(c * (z - b));
    }
    return 0.0;
  }
};

// constant: c0; linear: c0 + coef . s; relu_linear: max(0, c0 + coef . s)
struct WeightSpec {
  WeightFamily family = WeightFamily::constant;
  double c0 = 1.0;
  std::vector<double> coef;

  double operator()(std::span<const double> s) const {
    if (family == WeightFamily::constant) return c0;
    double v = c0;
    for (std::size_t i = 0; i < coef.size() && i < s.size(); ++i) v += coef[i] * s[i];
    return family == WeightFamily::relu_linear ? std::max(0.0, v) : v;
  }
};

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sd = 1.0;
};

struct StaticNumericSpec {
  std::string name;
  std::vector<MixtureComponent> mixture{{1.0, 0.0, 1.0}};
};

struct StaticCategoricalSpec {
  std::string name;
  std::vector<std::string> levels;
  std::vector<double> probabilities;
  std::vector<double> bias_effect;  // added to w0* per level
};

struct TimeVaryingSpec {
  std::string name;
  std::string unit;
  double loc = 0.0;
  double scale = 1.0;
  ShapeSpec shape;
  WeightSpec weight;
};

struct SyntheticSpec {
  std::vector<StaticNumericSpec> statics;
  std::vector<StaticCategoricalSpec> categoricals;
  std::vector<TimeVaryingSpec> time_varying;
  WeightSpec bias{WeightFamily::linear, 0.0, {}};
  // When set, a constant is added to the bias so the mean Bayes probability
  // over the generated rows matches this value.
  std::optional<double> target_prevalence;

  void validate() const {
    if (statics.empty() && categoricals.empty() && time_varying.empty()) throw InvalidArgument("empty synthetic spec");
    std::set<std::string> names;
    auto add = [&](const std::string& n) {
      if (n.empty() || !names.insert(n).second) throw InvalidArgument("synthetic feature names must be unique: '" + n + "'");
    };
    for (const auto& s : statics) {
      add(s.name);
      if (s.mixture.empty()) throw InvalidArgument("static '" + s.name + "' has an empty mixture");
      double total = 0.0;
      for (const auto& m : s.mixture) {
        if (!(m.weight > 0.0) || !(m.sd >= 0.0)) throw InvalidArgument("invalid mixture component in '" + s.name + "'");
        total += m.weight;
      }
      if (!(total > 0.0)) throw InvalidArgument("mixture weights must be positive");
    }
    for (const auto& c : categoricals) {
      add(c.name);
      if (c.levels.empty() || c.levels.size() != c.probabilities.size() || c.levels.size() != c.bias_effect.size()) {
        throw InvalidArgument("categorical '" + c.name + "' needs levels, probabilities and bias effects of equal length");
      }
      for (double p : c.probabilities) {
        if (!(p >= 0.0)) throw InvalidArgument("negative level probability in '" + c.name + "'");
      }
    }
    for (const auto& t : time_varying) {
      add(t.name);
      if (!(t.scale > 0.0)) throw InvalidArgument("time-varying '" + t.name + "' needs a positive scale");
      if (t.weight.coef.size() > statics.size()) throw InvalidArgument("weight of '" + t.name + "' has too many coefficients");
    }
    if (bias.coef.size() > statics.size()) throw InvalidArgument("bias has too many coefficients");
    if (target_prevalence && !(*target_prevalence > 0.0 && *target_prevalence < 1.0)) {
      throw InvalidArgument("target prevalence must lie in (0, 1)");
    }
  }
};

struct SyntheticTruth {
  SyntheticSpec spec;
  double bias_offset = 0.0;
  std::vector<double> bayes_probability;

  double f_star(std::size_t t, double raw) const {
    const auto& tv = spec.time_varying.at(t);
    return tv.shape((raw - tv.loc) / tv.scale);
  }
  double w_star(std::size_t t, std::span<const double> statics) const { return spec.time_varying.at(t).weight(statics); }
  double w0_star(std::span<const double> statics, std::span<const std::size_t> levels) const {
    double b = spec.bias(statics) + bias_offset;
    for (std::size_t k = 0; k < levels.size() && k < spec.categoricals.size(); ++k) {
      b += spec.categoricals[k].bias_effect.at(levels[k]);
    }
    return b;
  }
  double contribution(std::size_t t, std::span<const double> statics, double raw) const {
    return w_star(t, statics) * f_star(t, raw);
  }
};

struct SyntheticData {
  FeatureSchema schema;
  RawTable table;
  SyntheticTruth truth;
};

inline FeatureSchema synthetic_schema(const SyntheticSpec& spec) {
  FeatureSchema s;
  for (const auto& st : spec.statics) {
    FeatureSpec f;
    f.name = st.name;
    s.features.push_back(f);
  }
  for (const auto& c : spec.categoricals) {
    FeatureSpec f;
    f.name = c.name;
    f.kind = Kind::categorical;
    f.levels = c.levels;
    s.features.push_back(f);
  }
  for (const auto& t : spec.time_varying) {
    FeatureSpec f;
    f.name = t.name;
    f.role = Role::time_varying;
    f.unit = t.unit;
    s.features.push_back(f);
  }
  return s;
}

inline SyntheticData generate_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw InvalidArgument("synthetic row count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const std::size_t ns = spec.statics.size(), nc = spec.categoricals.size(), nt = spec.time_varying.size();
  std::vector<double> s(n * ns), x(n * nt);
  std::vector<std::size_t> lv(n * nc);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < ns; ++i) {
      const auto& mix = spec.statics[i].mixture;
      std::vector<double> w;
      for (const auto& m : mix) w.push_back(m.weight);
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      const auto& m = mix[pick(rng)];
      s[r * ns + i] = m.mean + m.sd * normal(rng);
    }
    for (std::size_t k = 0; k < nc; ++k) {
      const auto& p = spec.categoricals[k].probabilities;
      std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
      lv[r * nc + k] = pick(rng);
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& tv = spec.time_varying[t];
      x[r * nt + t] = tv.loc + tv.scale * normal(rng);
    }
  }

  SyntheticTruth truth;
  truth.spec = spec;
  std::vector<double> base(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::span<const double> sr(s.data() + r * ns, ns);
    const std::span<const std::size_t> lr(lv.data() + r * nc, nc);
    double z = truth.w0_star(sr, lr);
    for (std::size_t t = 0; t < nt; ++t) z += truth.contribution(t, sr, x[r * nt + t]);
    base[r] = z;
  }
  if (spec.target_prevalence) {
    auto mean_prob = [&](double off) {
      double m = 0.0;
      for (double z : base) m += sigmoid(z + off);
      return m / static_cast<double>(n);
    };
    double lo = -50.0, hi = 50.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_prob(mid) < *spec.target_prevalence ? lo : hi) = mid;
    }
    truth.bias_offset = 0.5 * (lo + hi);
  }
  truth.bayes_probability.resize(n);
  for (std::size_t r = 0; r < n; ++r) truth.bayes_probability[r] = sigmoid(base[r] + truth.bias_offset);

  SyntheticData out;
  out.schema = synthetic_schema(spec);
  const std::size_t width = std::to_string(n).size();
  for (std::size_t r = 0; r < n; ++r) {
    std::string id = std::to_string(r + 1);
    out.table.ids.push_back("s" + std::string(width - id.size(), '0') + id);
    out.table.labels.push_back(unif(rng) < truth.bayes_probability[r] ? 1 : 0);
    std::vector<Cell> row;
    for (std::size_t i = 0; i < ns; ++i) row.emplace_back(s[r * ns + i]);
    for (std::size_t k = 0; k < nc; ++k) row.emplace_back(spec.categoricals[k].levels[lv[r * nc + k]]);
    for (std::size_t t = 0; t < nt; ++t) row.emplace_back(x[r * nt + t]);
    out.table.rows.push_back(std::move(row));
  }
  out.truth = std::move(truth);
  return out;
}

// Two statics, one categorical and four time-varying features whose weights
// depend on the statics; base rate near 6%.
inline SyntheticSpec default_interaction_spec() {
  SyntheticSpec s;
  s.statics = {{"severity", {{0.6, -0.5, 0.7}, {0.4, 0.8, 0.6}}}, {"age_score", {{1.0, 0.0, 1.0}}}};
  s.categoricals = {{"surgery_type", {"general", "cardiac", "orthopedic"}, {0.5, 0.2, 0.3}, {0.0, 0.4, -0.3}}};
  s.time_varying = {
      {"map_mean", "mmHg", 75.0, 10.0, {ShapeFamily::quadratic, 0.6, 0.0, 0.0},
       {WeightFamily::relu_linear, 1.0, {1.2, 0.0}}},
      {"hr_frac_gt_100", "fraction", 0.2, 0.05, {ShapeFamily::sigmoid_bump, 2.5, 0.5, 0.8},
       {WeightFamily::relu_linear, 0.3, {1.2, 0.6}}},
      {"crystalloid", "mL/kg", 30.0, 8.0, {ShapeFamily::piecewise_linear, 1.5, 0.3, -0.2},
       {WeightFamily::linear, 0.0, {0.0, -1.2}}},
      {"phenylephrine", "mcg/kg", 5.0, 1.5, {ShapeFamily::monotone, 0.8, 0.0, 1.5},
       {WeightFamily::constant, 1.0, {}}},
  };
  s.bias = {WeightFamily::linear, 0.0, {0.4, 0.2}};
  s.target_prevalence = 0.06;
  return s;
}

// ---------------------------------------------------------------- JSON

inline json to_json(const SyntheticSpec& s) {
  auto weight = [](const WeightSpec& w) { return json{{"family", to_string(w.family)}, {"c0", w.c0}, {"coef", w.coef}}; };
  json j;
  j["statics"] = json::array();
  for (const auto& st : s.statics) {
    json m = json::array();
    for (const auto& c : st.mixture) m.push_back({{"weight", c.weight}, {"mean", c.mean}, {"sd", c.sd}});
    j["statics"].push_back({{"name", st.name}, {"mixture", m}});
  }
  j["categoricals"] = json::array();
  for (const auto& c : s.categoricals) {
    j["categoricals"].push_back(
        {{"name", c.name}, {"levels", c.levels}, {"probabilities", c.probabilities}, {"bias_effect", c.bias_effect}});
  }
  j["time_varying"] = json::array();
  for (const auto& t : s.time_varying) {
    j["time_varying"].push_back({{"name", t.name},
                                 {"unit", t.unit},
                                 {"loc", t.loc},
                                 {"scale", t.scale},
                                 {"shape", {{"family", to_string(t.shape.family)}, {"a", t.shape.a}, {"b", t.shape.b},
                                            {"c", t.shape.c}}},
                                 {"weight", weight(t.weight)}});
  }
  j["bias"] = weight(s.bias);
  if (s.target_prevalence) j["target_prevalence"] = *s.target_prevalence;
  return j;
}

inline SyntheticSpec synthetic_spec_from_json(const json& j) {
  try {
    auto weight = [](const json& w) {
      WeightSpec out;
      out.family = weight_from_string(w.at("family").get<std::string>());
      out.c0 = w.value("c0", 0.0);
      out.coef = w.value("coef", std::vector<double>{});
      return out;
    };
    SyntheticSpec s;
    for (const auto& st : j.value("statics", json::array())) {
      StaticNumericSpec x;
      x.name = st.at("name").get<std::string>();
      x.mixture.clear();
      for (const auto& m : st.at("mixture")) {
        x.mixture.push_back({m.value("weight", 1.0), m.value("mean", 0.0), m.value("sd", 1.0)});
      }
      s.statics.push_back(x);
    }
    for (const auto& c : j.value("categoricals", json::array())) {
      s.categoricals.push_back({c.at("name").get<std::string>(), c.at("levels").get<std::vector<std::string>>(),
                                c.at("probabilities").get<std::vector<double>>(),
                                c.at("bias_effect").get<std::vector<double>>()});
    }
    for (const auto& t : j.value("time_varying", json::array())) {
      TimeVaryingSpec x;
      x.name = t.at("name").get<std::string>();
      x.unit = t.value("unit", std::string{});
      x.loc = t.value("loc", 0.0);
      x.scale = t.value("scale", 1.0);
      const auto& sh = t.at("shape");
      x.shape = {shape_from_string(sh.at("family").get<std::string>()), sh.value("a", 1.0), sh.value("b", 0.0),
                 sh.value("c", 1.0)};
      x.weight = weight(t.at("weight"));
      s.time_varying.push_back(x);
    }
    if (j.contains("bias")) s.bias = weight(j.at("bias"));
    if (j.contains("target_prevalence")) s.target_prevalence = j.at("target_prevalence").get<double>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid synthetic spec: ") + e.what());
  }
}

}  // namespace fgam::data
