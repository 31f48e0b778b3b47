// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fgam/baselines.hpp"
#include "fgam/data/ingest.hpp"
#include "fgam/data/synthetic.hpp"
#include "fgam/io/model_file.hpp"
#include "fgam/service.hpp"
#include "fgam/training.hpp"
#include "support/payloads.hpp"

namespace {

using namespace fgam;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Tolerances and sizes.
constexpr double kGradTol = 1e-5;
constexpr double kGradEps = 1e-5;
constexpr int kGradConfigs = 24;
constexpr double kGradSeconds = 60.0;
constexpr double kAdditivityTol = 1e-9;
constexpr int kAdditivityInputs = 10000;
constexpr int kLocalityTrials = 1000;
constexpr double kEquivalenceTol = 1e-12;
constexpr int kAurocSets = 100;
constexpr double kHanleyTol = 1e-12;
constexpr std::size_t kRecoveryRows = 20000;
constexpr double kRecoveryLrMargin = 0.05;
constexpr double kRecoveryBayesGap = 0.03;
constexpr double kRecoverySpearman = 0.9;
constexpr double kRecoverySeconds = 300.0;
constexpr int kServiceDifferential = 1000;
constexpr int kServiceFuzz = 10000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s  %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
  failures += !o.pass;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double relu(double z) { return z > 0 ? z : 0.0; }
double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void jitter(FGamParams& p, Rng& rng, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  for (auto& v : parameter_views(p)) {
    if (!v.trainable) continue;
    for (double& x : v.values) x += n(rng);
  }
}

FGamConfig random_config(Rng& rng) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  FGamConfig c;
  c.static_numeric = pick(0, 3);
  for (std::size_t k = pick(0, 2); k > 0; --k) c.static_cardinalities.push_back(pick(2, 5));
  c.d_tv = pick(1, 4);
  c.dnnn_depth = pick(1, 4);
  c.dnnn_width = pick(2, 6);
  c.trunk_widths.clear();
  for (std::size_t k = pick(0, 2); k > 0; --k) c.trunk_widths.push_back(pick(3, 7));
  c.embedding_dim = pick(1, 3);
  c.dropout_rate = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
  return c;
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
  for (double& v : in.tv.values()) v = 1.5 * norm(rng);
  return in;
}

// ------------------------------------------------------------ gradient

Outcome gradient_exactness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int k = 0; k < kGradConfigs; ++k) {
    Rng rng(1000 + k);
    const auto c = random_config(rng);
    auto p = init_params(c, 1000 + k);
    jitter(p, rng, 0.1);
    const auto in = random_input(c, 6, rng);
    std::vector<int> y(6);
    for (auto& v : y) v = std::bernoulli_distribution(0.4)(rng);
    y[0] = 1;
    const double pw = k % 3 == 0 ? 2.5 : 1.0;
    // Half the configurations run in training mode with a fixed dropout mask.
    const Mode mode = k % 2 ? Mode::train : Mode::eval;
    const std::uint64_t mask_seed = 77 + k;
    auto eval = [&] {
      Rng mask(mask_seed);
      return loss_and_gradient(p, in, y, mode, &mask, pw);
    };
    const auto lg = eval();
    auto views = parameter_views(p);
    const auto gv = parameter_views(std::as_const(lg.grad));
    std::vector<ParamRef> refs;
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (views[i].trainable) refs.push_back({views[i].values, gv[i].values});
    }
    worst = std::max(worst, grad_check([&] { return eval().loss; }, refs, kGradEps));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst < kGradTol && secs < kGradSeconds,
          fmt("%d configs, max rel err %.2e (< %.0e), %.1fs (< %.0fs)", kGradConfigs, worst, kGradTol, secs,
              kGradSeconds)};
}

// ------------------------------------------------------------ additivity and locality

Outcome additivity() {
  double worst = 0.0, worst_factor = 0.0;
  constexpr int kModels = 10;
  for (int m = 0; m < kModels; ++m) {
    Rng rng(2000 + m);
    const auto c = random_config(rng);
    auto p = init_params(c, 2000 + m);
    jitter(p, rng, 0.3);
    const auto in = random_input(c, kAdditivityInputs / kModels, rng);
    for (std::size_t r = 0; r < in.rows(); ++r) {
      const auto ex = example_at(in, r);
      const auto rep = contributions(p, ex);
      double sum = rep.bias, dsum = rep.display_bias;
      for (double v : rep.contributions) sum += v;
      for (double v : rep.display_contributions) dsum += v;
      const double logit = forward_batch(p, ex.as_batch(), Mode::eval).logits[0];
      worst = std::max({worst, std::abs(sum - logit), std::abs(dsum - logit)});
      // w_0 + sum_t w_t f_t assembled from separately evaluated factors.
      const auto w = static_weights(p, ex);
      double z = w.bias;
      for (std::size_t t = 0; t < c.d_tv; ++t) z += w.weights[t] * feature_transform(p, t, std::span(&ex.tv[t], 1))[0];
      worst_factor = std::max(worst_factor, std::abs(z - logit));
    }
  }
  return {worst <= kAdditivityTol && worst_factor <= kAdditivityTol,
          fmt("%d inputs, max |bias + sum c - logit| %.1e, factored %.1e (<= %.0e)", kAdditivityInputs, worst,
              worst_factor, kAdditivityTol)};
}

Outcome locality() {
  int violations = 0;
  Rng rng(3000);
  std::vector<FGamParams> models;
  for (int m = 0; m < 5; ++m) {
    auto c = random_config(rng);
    c.d_tv = 2 + m % 3;
    auto p = init_params(c, 3000 + m);
    jitter(p, rng, 0.3);
    models.push_back(p);
  }
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < kLocalityTrials; ++trial) {
    const auto& p = models[trial % models.size()];
    const auto ex = example_at(random_input(p.config, 1, rng), 0);
    auto moved = ex;
    const std::size_t t = rng() % p.config.d_tv;
    moved.tv[t] += n(rng);
    const auto a = contributions(p, ex);
    const auto b = contributions(p, moved);
    bool ok = std::memcmp(&a.bias, &b.bias, sizeof(double)) == 0;
    for (std::size_t u = 0; u < p.config.d_tv; ++u) {
      if (u == t) continue;
      ok = ok && std::memcmp(&a.contributions[u], &b.contributions[u], sizeof(double)) == 0;
    }
    violations += !ok;
  }
  return {violations == 0, fmt("%d trials, %d with other contributions or bias changed", kLocalityTrials, violations)};
}

// ------------------------------------------------------------ degenerate forms

double mlp_by_hand(const Mlp& net, double x) {
  std::vector<double> a{x};
  for (const auto& layer : net.layers) {
    std::vector<double> next(layer.out_width());
    for (std::size_t o = 0; o < next.size(); ++o) {
      double acc = layer.bias[o];
      for (std::size_t k = 0; k < a.size(); ++k) acc += layer.weight(o, k) * a[k];
      next[o] = layer.activation == Activation::relu ? relu(acc) : acc;
    }
    a = next;
  }
  return a[0];
}

Outcome degenerate_equivalence() {
  double delr_err = 0.0, lr_err = 0.0;
  for (int m = 0; m < 10; ++m) {
    Rng rng(4000 + m);
    auto c = delr_config(random_config(rng));
    auto p = make_degenerate(c, 4000 + m);
    jitter(p, rng, 0.3);
    const auto in = random_input(c, 200, rng);
    const auto probs = predict_proba(p, in);
    for (std::size_t r = 0; r < in.rows(); ++r) {
      double z = p.bias_head.bias[0];
      for (std::size_t t = 0; t < c.d_tv; ++t) z += p.weight_head.bias[t] * mlp_by_hand(p.feature_nets[t], in.tv(r, t));
      delr_err = std::max(delr_err, std::abs(probs[r] - sig(z)));
    }

    const auto lc = logistic_config(c.d_tv + 1);
    auto lp = make_degenerate(lc, 5000 + m);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> beta(lc.d_tv);
    for (auto& b : beta) b = n(rng);
    const double b0 = n(rng);
    lp.weight_head.bias = beta;
    lp.bias_head.bias = {b0};
    const auto lin = random_input(lc, 200, rng);
    const auto lprobs = predict_proba(lp, lin);
    for (std::size_t r = 0; r < lin.rows(); ++r) {
      double z = b0;
      for (std::size_t t = 0; t < lc.d_tv; ++t) z += beta[t] * lin.tv(r, t);
      lr_err = std::max(lr_err, std::abs(lprobs[r] - sig(z)));
    }
  }
  return {delr_err <= kEquivalenceTol && lr_err <= kEquivalenceTol,
          fmt("no-statics vs hand DELR %.1e, frozen identity vs closed-form LR %.1e (<= %.0e)", delr_err, lr_err,
              kEquivalenceTol)};
}

// ------------------------------------------------------------ metrics

Outcome auroc_oracle() {
  std::mt19937_64 rng(6000);
  int mismatches = 0;
  for (int s = 0; s < kAurocSets; ++s) {
    const std::size_t n = 2 + rng() % 499;
    std::vector<double> score(n);
    std::vector<int> y(n);
    const int levels = 2 + static_cast<int>(rng() % 30);
    for (std::size_t i = 0; i < n; ++i) {
      score[i] = static_cast<double>(rng() % levels) / levels;
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    long long twice = 0, pos = 0, neg = 0;
    for (int v : y) (v ? pos : neg)++;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] == 1 && y[j] == 0) twice += score[i] > score[j] ? 2 : score[i] == score[j] ? 1 : 0;
      }
    }
    const double brute = static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    mismatches += auroc(score, y) != brute;
  }
  return {mismatches == 0, fmt("%d sets with ties, %d not exactly equal to pair counting", kAurocSets, mismatches)};
}

Outcome hanley_mcneil() {
  bool ok = true;
  std::string why;
  const auto certain = hanley_mcneil_ci(1.0, 40, 60);
  if (certain.lo != 1.0 || certain.hi != 1.0) ok = false, why += " A=1 not zero width;";
  if (std::abs(hanley_mcneil_se(0.5, 1, 1) - 0.5) > kHanleyTol) ok = false, why += " single pair SE != 0.5;";
  double worst = 0.0;
  const double cases[][3] = {{0.7, 30, 70}, {0.824, 1304, 20070}, {0.6, 5, 9}, {0.95, 200, 300}, {0.3, 12, 40}};
  for (const auto& c : cases) {
    const double a = c[0], np = c[1], nn = c[2];
    const double q1 = a / (2 - a), q2 = 2 * a * a / (1 + a);
    const double se = std::sqrt((a * (1 - a) + (np - 1) * (q1 - a * a) + (nn - 1) * (q2 - a * a)) / (np * nn));
    worst = std::max(worst, std::abs(hanley_mcneil_se(a, static_cast<std::size_t>(np), static_cast<std::size_t>(nn)) - se));
    const auto ci = hanley_mcneil_ci(a, static_cast<std::size_t>(np), static_cast<std::size_t>(nn));
    worst = std::max(worst, std::abs(ci.hi - std::min(1.0, a + 1.959963984540054 * se)));
  }
  if (worst > kHanleyTol) ok = false;
  return {ok, fmt("zero width at A=1, SE(0.5,1,1)=0.5, spot checks max err %.1e (<= %.0e)", worst, kHanleyTol) + why};
}

// ------------------------------------------------------------ synthetic recovery

Outcome synthetic_recovery() {
  const auto t0 = Clock::now();
  const std::uint64_t seed = 1;
  const auto spec = data::default_interaction_spec();
  const auto syn = data::generate_synthetic(spec, kRecoveryRows, seed);
  const std::array<double, 3> fractions{0.7, 0.1, 0.2};
  const auto cache = data::build_cache(syn.schema, syn.table, fractions, seed);
  const auto idx = split_indices(syn.table.size(), fractions, seed);
  std::vector<double> bayes;
  for (auto i : idx.test) bayes.push_back(syn.truth.bayes_probability[i]);
  const double bayes_auc = auroc(bayes, cache.test.labels);

  const auto mc = data::apply_layout(FGamConfig{}, cache.stats);
  TrainConfig tc;
  tc.seed = seed;
  const auto fg = train(cache.train, cache.valid, mc, tc);
  const double fgam_auc = auroc(predict_proba(fg.params, cache.test.x), cache.test.labels);

  const auto lr_train = logistic_design(cache.train, mc.static_cardinalities);
  const auto lr_valid = logistic_design(cache.valid, mc.static_cardinalities);
  const auto lr_test = logistic_design(cache.test, mc.static_cardinalities);
  TrainConfig lc = tc;
  lc.learning_rate = 1e-2;
  const auto lr = train(lr_train, lr_valid, logistic_config(lr_train.x.tv.cols()), lc);
  const double lr_auc = auroc(predict_proba(lr.params, lr_test.x), lr_test.labels);

  // Curves at a fixed static profile against the generator's w* f*.
  const std::vector<double> statics{0.8, -1.0};
  std::vector<data::Cell> row;
  for (const auto& s : spec.statics) row.emplace_back(s.name == "severity" ? statics[0] : statics[1]);
  for (const auto& c : spec.categoricals) row.emplace_back(c.levels.front());
  for (const auto& t : spec.time_varying) row.emplace_back(t.loc);
  const auto ex = data::encode_row(cache.schema, cache.stats, row);
  const auto tv_names = cache.stats.tv_columns();
  double min_rho = 1.0;
  std::string rhos;
  for (std::size_t t = 0; t < spec.time_varying.size(); ++t) {
    const auto& name = spec.time_varying[t].name;
    const auto pos = static_cast<std::size_t>(std::find(tv_names.begin(), tv_names.end(), name) - tv_names.begin());
    const auto* ns = cache.stats.find_numeric(name);
    std::vector<double> grid, truth;
    for (int k = 0; k < 50; ++k) {
      const double raw = ns->p1 + (ns->p99 - ns->p1) * k / 49.0;
      grid.push_back(data::standardize(*ns, raw));
      truth.push_back(syn.truth.contribution(t, statics, raw) - syn.truth.contribution(t, statics, ns->median));
    }
    const auto curve = contribution_curve(fg.params, ex, pos, grid);
    const double at_median = contribution_curve(fg.params, ex, pos, std::vector<double>{data::standardize(*ns, ns->median)})[0].contribution;
    std::vector<double> model;
    for (const auto& c : curve) model.push_back(c.contribution - at_median);
    const double rho = spearman(model, truth);
    min_rho = std::min(min_rho, rho);
    rhos += fmt(" %s=%.3f", name.c_str(), rho);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = fgam_auc >= lr_auc + kRecoveryLrMargin && bayes_auc - fgam_auc <= kRecoveryBayesGap &&
                    min_rho >= kRecoverySpearman && secs < kRecoverySeconds;
  return {pass, fmt("AUROC F-GAM %.4f, LR %.4f (need +%.2f), Bayes %.4f (gap <= %.2f); Spearman", fgam_auc, lr_auc,
                    kRecoveryLrMargin, bayes_auc, kRecoveryBayesGap) +
                    rhos + fmt(" (>= %.1f); %.0fs (< %.0fs)", kRecoverySpearman, secs, kRecoverySeconds)};
}

// ------------------------------------------------------------ determinism

struct SmallRun {
  data::DatasetCache cache;
  FGamConfig config;
};

SmallRun small_run() {
  const auto syn = data::generate_synthetic(data::default_interaction_spec(), 2000, 9);
  SmallRun r;
  r.cache = data::build_cache(syn.schema, syn.table, {0.7, 0.1, 0.2}, 9);
  r.config = data::apply_layout(FGamConfig{}, r.cache.stats);
  r.config.trunk_widths = {16, 8};
  return r;
}

std::string model_bytes(const SmallRun& r, std::uint64_t seed) {
  TrainConfig tc;
  tc.seed = seed;
  tc.max_epochs = 6;
  tc.batch_size = 128;
  const auto res = train(r.cache.train, r.cache.valid, r.config, tc);
  std::ostringstream os;
  io::write_model(os, {res.params, r.cache.schema, r.cache.stats, tc, res.history.best_epoch});
  return os.str();
}

Outcome determinism() {
  const auto a = small_run();
  const auto b = small_run();
  std::ostringstream ca, cb;
  data::write_cache(ca, a.cache);
  data::write_cache(cb, b.cache);
  const auto m1 = model_bytes(a, 31), m2 = model_bytes(b, 31), m3 = model_bytes(a, 32);
  const bool pass = ca.str() == cb.str() && m1 == m2 && m1 != m3;
  return {pass, fmt("dataset cache identical: %s; model files identical: %s (%zu bytes); other seed differs: %s",
                    ca.str() == cb.str() ? "yes" : "no", m1 == m2 ? "yes" : "no", m1.size(), m1 != m3 ? "yes" : "no")};
}

// ------------------------------------------------------------ labels

Outcome labeling_boundaries() {
  using data::Outcome;
  struct AkiCase {
    const char* what;
    std::optional<double> preop;
    std::optional<double> age_days;
    std::vector<data::CreatinineValue> post;
    bool dialysis;
    Outcome want;
  };
  const std::vector<AkiCase> aki{
      {"rise of exactly 0.3", 1.0, 2, {{12, 1.3}}, false, Outcome::negative},
      {"rise just over 0.3", 1.0, 2, {{12, 1.31}}, false, Outcome::positive},
      {"rise of exactly 50%", 0.5, 2, {{6, 0.75}}, false, Outcome::negative},
      {"rise just over 50%", 0.5, 2, {{6, 0.76}}, false, Outcome::positive},
      {"peak at 48 h counts", 0.9, 5, {{2, 0.9}, {48.0, 1.5}}, false, Outcome::positive},
      {"peak after 48 h ignored", 0.9, 5, {{2, 0.9}, {48.5, 1.5}}, false, Outcome::negative},
      {"no value in window", 0.9, 5, {{60, 2.0}}, false, Outcome::undefined},
      {"dialysis excluded", 0.9, 5, {{6, 3.0}}, true, Outcome::undefined},
      {"no preop value", std::nullopt, std::nullopt, {{6, 3.0}}, false, Outcome::undefined},
      {"preop 30 days old", 1.1, 30, {{6, 1.2}}, false, Outcome::negative},
      {"preop 31 days old", 1.1, 31, {{6, 2.0}}, false, Outcome::undefined},
      {"decrease", 1.4, 1, {{6, 1.0}}, false, Outcome::negative},
  };
  struct ArfCase {
    const char* what;
    data::RespiratoryCourse c;
    Outcome want;
  };
  const std::vector<ArfCase> arf{
      {"ventilated exactly 48 h", {48.0, false, false, false, false}, Outcome::negative},
      {"ventilated over 48 h", {48.25, false, false, false, false}, Outcome::positive},
      {"reintubated", {3.0, true, false, false, false}, Outcome::positive},
      {"extubated promptly", {0.0, false, false, false, false}, Outcome::negative},
      {"ventilated before surgery", {72.0, false, true, false, false}, Outcome::undefined},
      {"second surgery", {72.0, false, false, true, false}, Outcome::undefined},
      {"died within 48 h", {10.0, true, false, false, true}, Outcome::undefined},
      {"long and reintubated", {50.0, true, false, false, false}, Outcome::positive},
  };
  std::string wrong;
  for (const auto& c : aki) {
    if (data::label_aki(c.preop, c.age_days, c.post, c.dialysis).outcome != c.want) wrong += std::string(" [AKI ") + c.what + "]";
  }
  for (const auto& c : arf) {
    if (data::label_arf(c.c).outcome != c.want) wrong += std::string(" [ARF ") + c.what + "]";
  }
  return {wrong.empty(), fmt("%zu AKI + %zu ARF cases", aki.size(), arf.size()) + (wrong.empty() ? "" : ", wrong:" + wrong)};
}

// ------------------------------------------------------------ service

Outcome service_differential() {
  const auto run = small_run();
  TrainConfig tc;
  tc.max_epochs = 3;
  const auto res = train(run.cache.train, run.cache.valid, run.config, tc);
  io::ModelFile m{res.params, run.cache.schema, run.cache.stats, tc, res.history.best_epoch};
  const service::ModelService svc({m, io::model_version(m)});
  const auto snap = svc.snapshot();
  const auto names = snap->tv_names();
  std::mt19937_64 rng(8000);
  int mismatches = 0;
  for (int i = 0; i < kServiceDifferential; ++i) {
    auto p = testing::random_payload(*snap, rng);
    const auto ex = data::encode_row(m.schema, m.stats, p.cells);
    const auto lib = contributions(m.params, ex);
    const auto pr = svc.handle("POST", "/predict", p.body.dump());
    bool ok = pr.status == 200 && pr.body["probability"].get<double>() == forward(m.params, ex) &&
              pr.body["logit"].get<double>() == lib.logit;
    const auto cr = svc.handle("POST", "/contributions", p.body.dump());
    ok = ok && cr.status == 200 && cr.body["bias"].get<double>() == lib.bias;
    for (std::size_t t = 0; ok && t < names.size(); ++t) {
      ok = cr.body["contributions"][names[t]].get<double>() == lib.contributions[t] &&
           cr.body["display_contributions"][names[t]].get<double>() == lib.display_contributions[t];
    }
    const std::size_t t = rng() % names.size();
    p.body["feature"] = names[t];
    const auto cv = svc.handle("POST", "/curve", p.body.dump());
    ok = ok && cv.status == 200;
    if (ok) {
      const auto* ns = m.stats.find_numeric(names[t]);
      std::vector<double> grid;
      for (const auto& pt : cv.body["points"]) grid.push_back(data::standardize(*ns, pt["value"].get<double>()));
      const auto curve = contribution_curve(m.params, ex, t, grid);
      for (std::size_t k = 0; ok && k < grid.size(); ++k) {
        ok = cv.body["points"][k]["contribution"].get<double>() == curve[k].contribution;
      }
    }
    mismatches += !ok;
  }
  int server_errors = 0, rejected = 0;
  for (int i = 0; i < kServiceFuzz; ++i) {
    const auto [path, body] = testing::malformed_request(*snap, rng);
    const auto r = svc.handle("POST", path, body);
    server_errors += r.status >= 500;
    rejected += r.status >= 400 && r.status < 500;
  }
  const bool pass = mismatches == 0 && server_errors == 0 && svc.internal_errors() == 0;
  return {pass, fmt("%d payloads x 3 endpoints, %d mismatches; %d malformed, %d rejected, %d internal errors",
                    kServiceDifferential, mismatches, kServiceFuzz, rejected, server_errors)};
}

}  // namespace

int main() {
  report("gradient-exactness", gradient_exactness);
  report("additivity", additivity);
  report("locality", locality);
  report("degenerate-equivalence", degenerate_equivalence);
  report("auroc-oracle", auroc_oracle);
  report("hanley-mcneil", hanley_mcneil);
  report("synthetic-recovery", synthetic_recovery);
  report("determinism", determinism);
  report("labeling-boundaries", labeling_boundaries);
  report("service-differential", service_differential);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
