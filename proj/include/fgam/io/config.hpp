#pragma once

// JSON forms of the model hyperparameters and training settings.

#include <string>

#include "fgam/error.hpp"
#include "fgam/model.hpp"
#include "fgam/training.hpp"
#include "json.hpp"

namespace fgam::io {

using nlohmann::json;

inline json to_json(const FGamConfig& c) {
  return {{"static_numeric", c.static_numeric},
          {"static_cardinalities", c.static_cardinalities},
          {"d_tv", c.d_tv},
          {"dnnn_depth", c.dnnn_depth},
          {"dnnn_width", c.dnnn_width},
          {"trunk_widths", c.trunk_widths},
          {"embedding_dim", c.embedding_dim},
          {"dropout_rate", c.dropout_rate},
          {"trunk_dropout", c.trunk_dropout},
          {"frozen_identity_features", c.frozen_identity_features}};
}

// Missing keys keep the values already in `base`.
inline FGamConfig model_config_from_json(const json& j, FGamConfig base = {}) {
  try {
    base.static_numeric = j.value("static_numeric", base.static_numeric);
    base.static_cardinalities = j.value("static_cardinalities", base.static_cardinalities);
    base.d_tv = j.value("d_tv", base.d_tv);
    base.dnnn_depth = j.value("dnnn_depth", base.dnnn_depth);
    base.dnnn_width = j.value("dnnn_width", base.dnnn_width);
    base.trunk_widths = j.value("trunk_widths", base.trunk_widths);
    base.embedding_dim = j.value("embedding_dim", base.embedding_dim);
    base.dropout_rate = j.value("dropout_rate", base.dropout_rate);
    base.trunk_dropout = j.value("trunk_dropout", base.trunk_dropout);
    base.frozen_identity_features = j.value("frozen_identity_features", base.frozen_identity_features);
    return base;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid model config: ") + e.what());
  }
}

inline json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"split_fractions", c.split_fractions},
          {"positive_weight", c.positive_weight},
          {"optimizer", to_string(c.optimizer)},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon}};
}

inline TrainConfig train_config_from_json(const json& j, TrainConfig base = {}) {
  try {
    base.learning_rate = j.value("learning_rate", base.learning_rate);
    base.weight_decay = j.value("weight_decay", base.weight_decay);
    base.batch_size = j.value("batch_size", base.batch_size);
    base.max_epochs = j.value("max_epochs", base.max_epochs);
    base.patience = j.value("patience", base.patience);
    base.seed = j.value("seed", base.seed);
    base.split_fractions = j.value("split_fractions", base.split_fractions);
    base.positive_weight = j.value("positive_weight", base.positive_weight);
    base.optimizer = optimizer_from_string(j.value("optimizer", std::string(to_string(base.optimizer))));
    base.adam_beta1 = j.value("adam_beta1", base.adam_beta1);
    base.adam_beta2 = j.value("adam_beta2", base.adam_beta2);
    base.adam_epsilon = j.value("adam_epsilon", base.adam_epsilon);
    base.validate();
    return base;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid training config: ") + e.what());
  }
}

}  // namespace fgam::io
