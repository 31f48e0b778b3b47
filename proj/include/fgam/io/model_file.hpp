#pragma once

// Versioned model file: hyperparameters, schema, standardization statistics
// and parameters in one JSON document. The model version is an FNV-1a hash
// of the serialized payload, so identical models produce identical files.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "fgam/data/dataset.hpp"
#include "fgam/data/schema.hpp"
#include "fgam/error.hpp"
#include "fgam/io/config.hpp"
#include "fgam/model.hpp"
#include "fgam/training.hpp"
#include "json.hpp"

namespace fgam::io {

inline constexpr const char* kModelFormat = "fgam-model";
inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  FGamParams params;
  data::FeatureSchema schema;
  data::StandardizationStats stats;
  std::optional<TrainConfig> training;
  std::size_t best_epoch = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline json params_to_json(const FGamParams& p) {
  json j = json::object();
  for (const auto& v : parameter_views(p)) j[v.name] = std::vector<double>(v.values.begin(), v.values.end());
  return j;
}

// Rebuilds the layout from the config, then fills every named array.
inline FGamParams params_from_json(const FGamConfig& config, const json& j) {
  FGamParams p = init_params(config, 0);
  std::size_t seen = 0;
  for (auto& v : parameter_views(p)) {
    if (!j.contains(v.name)) throw ParseError("model file lacks parameter '" + v.name + "'");
    const auto values = j.at(v.name).get<std::vector<double>>();
    if (values.size() != v.values.size()) {
      throw ParseError("parameter '" + v.name + "' has " + std::to_string(values.size()) + " values, expected " +
                       std::to_string(v.values.size()));
    }
    for (double x : values) {
      if (!std::isfinite(x)) throw ParseError("parameter '" + v.name + "' is not finite");
    }
    std::copy(values.begin(), values.end(), v.values.begin());
    ++seen;
  }
  if (seen != j.size()) throw ParseError("model file has parameters the config does not declare");
  return p;
}

inline json payload_json(const ModelFile& m) {
  json j;
  j["config"] = to_json(m.params.config);
  j["schema"] = data::to_json(m.schema);
  j["stats"] = data::to_json(m.stats);
  j["params"] = params_to_json(m.params);
  if (m.training) {
    j["training"] = to_json(*m.training);
    j["best_epoch"] = m.best_epoch;
  }
  return j;
}

inline std::string model_version(const ModelFile& m) { return hex64(fnv1a64(payload_json(m).dump())); }

inline void write_model(std::ostream& os, const ModelFile& m) {
  json j;
  j["format"] = kModelFormat;
  j["format_version"] = kModelFormatVersion;
  j["model_version"] = model_version(m);
  j["payload"] = payload_json(m);
  os << j.dump(1) << '\n';
}

inline void save_model(const std::string& path, const ModelFile& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  write_model(out, m);
  if (!out) throw Error("failed writing model file '" + path + "'");
}

struct LoadedModel {
  ModelFile model;
  std::string version;
};

inline LoadedModel read_model(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string{}) != kModelFormat) throw ParseError("not an F-GAM model file");
    const int v = j.at("format_version").get<int>();
    if (v != kModelFormatVersion) {
      throw ParseError("unsupported model file version " + std::to_string(v) + " (expected " +
                       std::to_string(kModelFormatVersion) + ")");
    }
    const auto& p = j.at("payload");
    LoadedModel out;
    const auto config = model_config_from_json(p.at("config"));
    config.validate();
    out.model.params = params_from_json(config, p.at("params"));
    out.model.schema = data::schema_from_json(p.at("schema"));
    out.model.stats = data::stats_from_json(p.at("stats"));
    data::check_stats_match(out.model.schema, out.model.stats);
    if (p.contains("training")) {
      out.model.training = train_config_from_json(p.at("training"));
      out.model.best_epoch = p.value("best_epoch", std::size_t{0});
    }
    const auto layout = data::model_layout(out.model.stats);
    if (layout.static_numeric != config.static_numeric || layout.static_cardinalities != config.static_cardinalities ||
        layout.d_tv != config.d_tv) {
      throw ParseError("model layout does not match its standardization statistics");
    }
    out.version = j.at("model_version").get<std::string>();
    if (out.version != model_version(out.model)) throw ParseError("model version hash does not match its contents");
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid model file: ") + e.what());
  }
}

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  try {
    return read_model(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace fgam::io
