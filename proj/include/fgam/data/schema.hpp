#pragma once

// Feature schema: which columns exist, whether they are static
// (preoperative, fixed) or time-varying (intraoperative, modifiable), their
// kind, and optionally how raw channels are summarized into columns.

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fgam/error.hpp"
#include "json.hpp"

namespace fgam::data {

using nlohmann::json;

enum class Role { static_feature, time_varying };
enum class Kind { numeric, ordinal, categorical };

inline std::string to_string(Role r) { return r == Role::static_feature ? "static" : "time_varying"; }

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::numeric: return "numeric";
    case Kind::ordinal: return "ordinal";
    case Kind::categorical: return "categorical";
  }
  return "numeric";
}

inline Role role_from_string(const std::string& s) {
  if (s == "static") return Role::static_feature;
  if (s == "time_varying") return Role::time_varying;
  throw InvalidArgument("unknown feature role '" + s + "'");
}

inline Kind kind_from_string(const std::string& s) {
  if (s == "numeric") return Kind::numeric;
  if (s == "ordinal") return Kind::ordinal;
  if (s == "categorical") return Kind::categorical;
  throw InvalidArgument("unknown feature kind '" + s + "'");
}

struct FeatureSpec {
  std::string name;
  Role role = Role::static_feature;
  Kind kind = Kind::numeric;
  // Known levels for categoricals; empty means learn them from training data.
  std::vector<std::string> levels;
  std::string unit;
  // Case-level totals divided by body weight at ingest.
  bool per_kg = false;

  bool modifiable() const { return role == Role::time_varying; }
  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

enum class Statistic { mean, std, min, max, final };

inline std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::mean: return "mean";
    case Statistic::std: return "std";
    case Statistic::min: return "min";
    case Statistic::max: return "max";
    case Statistic::final: return "final";
  }
  return "mean";
}

inline Statistic statistic_from_string(const std::string& s) {
  if (s == "mean") return Statistic::mean;
  if (s == "std") return Statistic::std;
  if (s == "min") return Statistic::min;
  if (s == "max") return Statistic::max;
  if (s == "final") return Statistic::final;
  throw InvalidArgument("unknown statistic '" + s + "'");
}

enum class Direction { below, above };

struct Threshold {
  Direction direction = Direction::below;
  double cutoff = 0.0;
  friend bool operator==(const Threshold&, const Threshold&) = default;
};

inline std::string format_cutoff(double c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

// A raw intraoperative channel and the columns derived from it.
struct ChannelSpec {
  std::string name;
  std::string unit;
  std::vector<Statistic> statistics{Statistic::mean, Statistic::std, Statistic::min, Statistic::max};
  std::vector<Threshold> thresholds;
  // Thresholds compare value / body weight.
  bool thresholds_per_kg = false;

  std::string column(Statistic s) const { return name + "_" + to_string(s); }
  std::string column(const Threshold& t) const {
    return name + (t.direction == Direction::below ? "_frac_lt_" : "_frac_gt_") + format_cutoff(t.cutoff);
  }
  std::vector<std::string> columns() const {
    std::vector<std::string> out;
    for (auto s : statistics) out.push_back(column(s));
    for (const auto& t : thresholds) out.push_back(column(t));
    return out;
  }
  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

// Final volume / final pressure from two channels.
struct ComplianceSpec {
  std::string name = "compliance";
  std::string volume_channel = "tidal_volume";
  std::string pressure_channel = "peak_inspiratory_pressure";
  friend bool operator==(const ComplianceSpec&, const ComplianceSpec&) = default;
};

struct FeatureSchema {
  std::string id_column = "case_id";
  std::string label_column = "label";
  std::string weight_column;
  std::vector<FeatureSpec> features;
  std::vector<ChannelSpec> channels;
  std::optional<ComplianceSpec> compliance;

  // Columns as the model sees them: declared features followed by the
  // time-varying columns that channel summaries produce.
  std::vector<FeatureSpec> columns() const {
    std::vector<FeatureSpec> out = features;
    for (const auto& ch : channels) {
      for (const auto& name : ch.columns()) {
        FeatureSpec f;
        f.name = name;
        f.role = Role::time_varying;
        f.unit = name.find("_frac_") != std::string::npos ? "fraction" : ch.unit;
        out.push_back(f);
      }
    }
    if (compliance) {
      FeatureSpec f;
      f.name = compliance->name;
      f.role = Role::time_varying;
      out.push_back(f);
    }
    return out;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    const auto cols = columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i].name == name) return i;
    }
    return std::nullopt;
  }

  void validate() const {
    std::set<std::string> seen{id_column, label_column};
    if (id_column.empty() || label_column.empty()) throw InvalidArgument("schema needs id and label column names");
    if (id_column == label_column) throw InvalidArgument("id and label columns must differ");
    for (const auto& f : columns()) {
      if (f.name.empty()) throw InvalidArgument("feature with empty name");
      if (!seen.insert(f.name).second) throw InvalidArgument("duplicate column name '" + f.name + "'");
      if (f.kind == Kind::categorical && f.role == Role::time_varying) {
        throw InvalidArgument("time-varying feature '" + f.name + "' cannot be categorical");
      }
      if (f.kind != Kind::categorical && !f.levels.empty()) {
        throw InvalidArgument("levels given for non-categorical feature '" + f.name + "'");
      }
      std::set<std::string> lv(f.levels.begin(), f.levels.end());
      if (lv.size() != f.levels.size()) throw InvalidArgument("duplicate level in feature '" + f.name + "'");
      if (f.per_kg && weight_column.empty()) {
        throw InvalidArgument("feature '" + f.name + "' is per-kg but the schema has no weight column");
      }
    }
    for (const auto& ch : channels) {
      if (ch.thresholds_per_kg && weight_column.empty()) {
        throw InvalidArgument("channel '" + ch.name + "' uses per-kg thresholds but the schema has no weight column");
      }
      for (const auto& t : ch.thresholds) {
        if (!std::isfinite(t.cutoff)) throw InvalidArgument("non-finite cutoff in channel '" + ch.name + "'");
      }
    }
    if (compliance) {
      auto has = [&](const std::string& n) {
        for (const auto& ch : channels) {
          if (ch.name == n) return true;
        }
        return false;
      };
      if (!has(compliance->volume_channel) || !has(compliance->pressure_channel)) {
        throw InvalidArgument("compliance refers to an undeclared channel");
      }
    }
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

inline json to_json(const FeatureSchema& s) {
  json j;
  j["id_column"] = s.id_column;
  j["label_column"] = s.label_column;
  if (!s.weight_column.empty()) j["weight_column"] = s.weight_column;
  j["features"] = json::array();
  for (const auto& f : s.features) {
    json jf{{"name", f.name}, {"role", to_string(f.role)}, {"kind", to_string(f.kind)}};
    if (!f.levels.empty()) jf["levels"] = f.levels;
    if (!f.unit.empty()) jf["unit"] = f.unit;
    if (f.per_kg) jf["per_kg"] = true;
    j["features"].push_back(jf);
  }
  if (!s.channels.empty()) {
    j["channels"] = json::array();
    for (const auto& ch : s.channels) {
      json jc{{"name", ch.name}};
      if (!ch.unit.empty()) jc["unit"] = ch.unit;
      jc["statistics"] = json::array();
      for (auto st : ch.statistics) jc["statistics"].push_back(to_string(st));
      jc["thresholds"] = json::array();
      for (const auto& t : ch.thresholds) {
        jc["thresholds"].push_back(
            {{"direction", t.direction == Direction::below ? "below" : "above"}, {"cutoff", t.cutoff}});
      }
      if (ch.thresholds_per_kg) jc["thresholds_per_kg"] = true;
      j["channels"].push_back(jc);
    }
  }
  if (s.compliance) {
    j["compliance"] = {{"name", s.compliance->name},
                       {"volume_channel", s.compliance->volume_channel},
                       {"pressure_channel", s.compliance->pressure_channel}};
  }
  return j;
}

inline FeatureSchema schema_from_json(const json& j) {
  try {
    FeatureSchema s;
    s.id_column = j.value("id_column", s.id_column);
    s.label_column = j.value("label_column", s.label_column);
    s.weight_column = j.value("weight_column", std::string{});
    for (const auto& jf : j.at("features")) {
      FeatureSpec f;
      f.name = jf.at("name").get<std::string>();
      f.role = role_from_string(jf.at("role").get<std::string>());
      f.kind = kind_from_string(jf.value("kind", std::string("numeric")));
      f.levels = jf.value("levels", std::vector<std::string>{});
      f.unit = jf.value("unit", std::string{});
      f.per_kg = jf.value("per_kg", false);
      s.features.push_back(f);
    }
    if (j.contains("channels")) {
      for (const auto& jc : j.at("channels")) {
        ChannelSpec ch;
        ch.name = jc.at("name").get<std::string>();
        ch.unit = jc.value("unit", std::string{});
        if (jc.contains("statistics")) {
          ch.statistics.clear();
          for (const auto& st : jc.at("statistics")) ch.statistics.push_back(statistic_from_string(st.get<std::string>()));
        }
        for (const auto& jt : jc.value("thresholds", json::array())) {
          Threshold t;
          const auto dir = jt.at("direction").get<std::string>();
          if (dir != "below" && dir != "above") throw InvalidArgument("threshold direction must be below or above");
          t.direction = dir == "below" ? Direction::below : Direction::above;
          t.cutoff = jt.at("cutoff").get<double>();
          ch.thresholds.push_back(t);
        }
        ch.thresholds_per_kg = jc.value("thresholds_per_kg", false);
        s.channels.push_back(ch);
      }
    }
    if (j.contains("compliance")) {
      const auto& jc = j.at("compliance");
      ComplianceSpec c;
      c.name = jc.value("name", c.name);
      c.volume_channel = jc.value("volume_channel", c.volume_channel);
      c.pressure_channel = jc.value("pressure_channel", c.pressure_channel);
      s.compliance = c;
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid schema: ") + e.what());
  }
}

// Intraoperative channels and cutoffs commonly used for perioperative risk
// models; medication totals and preoperative features are site-specific and
// belong in `features`.
inline std::vector<ChannelSpec> default_channels() {
  using S = Statistic;
  const std::vector<S> all{S::mean, S::std, S::min, S::max};
  auto below = [](double c) { return Threshold{Direction::below, c}; };
  auto above = [](double c) { return Threshold{Direction::above, c}; };
  std::vector<ChannelSpec> v;
  v.push_back({"mean_arterial_pressure", "mmHg", all, {below(55), below(60), below(65)}, false});
  v.push_back({"systolic_blood_pressure", "mmHg", all, {}, false});
  v.push_back({"diastolic_blood_pressure", "mmHg", all, {}, false});
  v.push_back({"heart_rate", "bpm", all, {above(100), above(110), above(120), below(60), below(55), below(50)}, false});
  v.push_back({"pulse_oximeter", "%", {S::mean, S::std, S::min}, {below(90), below(85)}, false});
  v.push_back({"temperature", "C", all, {below(36), below(35.5)}, false});
  v.push_back({"respiratory_rate", "breaths/min", all, {}, false});
  v.push_back({"tidal_volume", "mL", {S::mean, S::std, S::max}, {above(10)}, true});
  v.push_back({"peak_inspiratory_pressure", "cmH2O", {S::mean, S::std, S::max}, {above(30)}, false});
  v.push_back({"peep", "cmH2O", all, {}, false});
  v.push_back({"fio2", "fraction", all, {}, false});
  v.push_back({"end_tidal_co2", "mmHg", all, {above(50), below(30)}, false});
  v.push_back({"end_tidal_anesthetic", "MAC", all, {}, false});
  return v;
}

}  // namespace fgam::data
