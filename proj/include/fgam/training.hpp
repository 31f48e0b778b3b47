#pragma once

// End-to-end training: seeded splits, mini-batch descent on mean
// cross-entropy with L2 weight decay, and early stopping on validation loss.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fgam/error.hpp"
#include "fgam/metrics.hpp"
#include "fgam/model.hpp"
#include "fgam/tabular.hpp"

namespace fgam {

enum class OptimizerKind { adam, sgd };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

inline OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  std::array<double, 3> split_fractions{0.7, 0.1, 0.2};
  double positive_weight = 1.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
    if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be >= 0");
    if (batch_size == 0) throw InvalidArgument("batch size must be positive");
    if (max_epochs == 0) throw InvalidArgument("max_epochs must be positive");
    if (!(positive_weight > 0.0)) throw InvalidArgument("positive class weight must be > 0");
  }
};

// Deterministic 64-bit mixing for per-epoch seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Random partition of 0..n-1. Train and validation sizes are rounded; the
// test split takes the remainder.
inline SplitIndices split_indices(std::size_t n, const std::array<double, 3>& fractions, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("cannot split an empty dataset");
  for (double f : fractions) {
    if (!(f > 0.0)) throw InvalidArgument("split fractions must be positive");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must sum to 1");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0x5eed));
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions[0]));
  const auto n_valid =
      std::min(n - n_train, static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions[1])));
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.valid.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                 perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), perm.end());
  return s;
}

struct DatasetSplits {
  TabularDataset train;
  TabularDataset valid;
  TabularDataset test;
};

inline DatasetSplits split(const TabularDataset& data, const std::array<double, 3>& fractions, std::uint64_t seed) {
  const auto idx = split_indices(data.rows(), fractions, seed);
  return {data.subset(idx.train), data.subset(idx.valid), data.subset(idx.test)};
}

// Mean log loss with probabilities clipped to [1e-12, 1 - 1e-12].
inline double cross_entropy(std::span<const double> probabilities, std::span<const int> labels,
                            double positive_weight = 1.0) {
  if (probabilities.size() != labels.size()) throw DimensionError("probability and label counts differ");
  if (probabilities.empty()) throw InvalidArgument("cross entropy of an empty set");
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) s += clipped_log_loss(probabilities[i], labels[i], positive_weight);
  return s / static_cast<double>(labels.size());
}

// Gradient step on every trainable parameter using g + lambda * theta.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}

  void step(FGamParams& params, const FGamParams& grad) {
    auto views = parameter_views(params);
    const auto gviews = parameter_views(grad);
    if (views.size() != gviews.size()) throw DimensionError("gradient layout does not match parameters");
    if (first_.empty()) {
      for (const auto& v : views) {
        first_.emplace_back(v.values.size(), 0.0);
        second_.emplace_back(v.values.size(), 0.0);
      }
    }
    ++t_;
    const double lr = cfg_.learning_rate, lambda = cfg_.weight_decay;
    const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (!views[i].trainable) continue;
      auto theta = views[i].values;
      auto g = gviews[i].values;
      auto& m = first_[i];
      auto& v = second_[i];
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double gk = g[k] + lambda * theta[k];
        if (cfg_.optimizer == OptimizerKind::sgd) {
          theta[k] -= lr * gk;
          continue;
        }
        m[k] = b1 * m[k] + (1.0 - b1) * gk;
        v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
        theta[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.adam_epsilon);
      }
    }
  }

  std::size_t steps() const { return t_; }

 private:
  TrainConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

// Tracks the best validation loss; stops after `patience` epochs without
// strict improvement. Epochs are numbered from 1.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when this epoch is the new best.
  bool observe(std::size_t epoch, double valid_loss) {
    last_epoch_ = epoch;
    if (best_epoch_ == 0 || valid_loss < best_loss_) {
      best_loss_ = valid_loss;
      best_epoch_ = epoch;
      return true;
    }
    return false;
  }

  bool should_stop() const { return best_epoch_ != 0 && last_epoch_ - best_epoch_ >= std::max<std::size_t>(patience_, 1); }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  std::size_t last_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_auroc = 0.0;  // NaN when the validation split is single-class
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  FGamParams params;
  TrainHistory history;
};

inline void write_history_csv(std::ostream& os, const TrainHistory& h) {
  os.precision(17);
  os << "epoch,train_loss,valid_loss,valid_auroc\n";
  for (const auto& e : h.epochs) {
    os << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << ',';
    if (std::isnan(e.valid_auroc)) {
      os << "nan";
    } else {
      os << e.valid_auroc;
    }
    os << '\n';
  }
}

inline double dataset_loss(const FGamParams& p, const TabularDataset& d, double positive_weight = 1.0) {
  return cross_entropy(predict_proba(p, d.x), d.labels, positive_weight);
}

inline double safe_auroc(std::span<const double> scores, std::span<const int> labels) {
  const auto c = count_classes(scores, labels);
  if (c.positives == 0 || c.negatives == 0) return std::numeric_limits<double>::quiet_NaN();
  return auroc(scores, labels);
}

inline EvalReport evaluate(const FGamParams& p, const TabularDataset& d, double level = 0.95) {
  const auto probs = predict_proba(p, d.x);
  return evaluate_scores(probs, d.labels, level);
}

// Trains from a seeded initialization and returns the parameters of the
// best validation epoch. Only the train and validation splits are visible.
// `on_epoch`, if set, sees each record as soon as the epoch is scored.
inline TrainResult train(const TabularDataset& train_set, const TabularDataset& valid_set, const FGamConfig& model_cfg,
                         const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  model_cfg.validate();
  train_set.validate();
  valid_set.validate();
  if (train_set.rows() == 0) throw InvalidArgument("training split is empty");
  if (valid_set.rows() == 0) throw InvalidArgument("validation split is empty");

  TrainResult result;
  FGamParams params = init_params(model_cfg, cfg.seed);
  result.params = params;
  Optimizer opt(cfg);
  EarlyStopping stopper(cfg.patience);
  std::vector<std::size_t> order(train_set.rows());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed, epoch, 1));
    Rng dropout_rng(mix_seed(cfg.seed, epoch, 2));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const ModelInput batch = train_set.x.subset(idx);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train_set.labels[idx[i]];
      LossAndGrad lg;
      try {
        lg = loss_and_gradient(params, batch, labels, Mode::train, &dropout_rng, cfg.positive_weight);
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no) + ": " + e.what());
      }
      if (!std::isfinite(lg.loss)) {
        throw NonFiniteError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no) + ": non-finite loss");
      }
      opt.step(params, lg.grad);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    try {
      rec.train_loss = dataset_loss(params, train_set, cfg.positive_weight);
      const auto valid_probs = predict_proba(params, valid_set.x);
      rec.valid_loss = cross_entropy(valid_probs, valid_set.labels, cfg.positive_weight);
      rec.valid_auroc = safe_auroc(valid_probs, valid_set.labels);
    } catch (const NonFiniteError& e) {
      throw NonFiniteError("training diverged after epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.valid_loss)) {
      throw NonFiniteError("training diverged after epoch " + std::to_string(epoch));
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (stopper.observe(epoch, rec.valid_loss)) result.params = params;
    result.history.stopped_epoch = epoch;
    if (stopper.should_stop()) break;
  }
  result.history.best_epoch = stopper.best_epoch();
  return result;
}

}  // namespace fgam
