#pragma once

// Raw tables to model-ready datasets: typed parsing of delimited text,
// statistics fitted on the training split, standardization, missing-value
// imputation and the versioned on-disk dataset cache.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "fgam/data/schema.hpp"
#include "fgam/error.hpp"
#include "fgam/matrix.hpp"
#include "fgam/model.hpp"
#include "fgam/tabular.hpp"
#include "json.hpp"

namespace fgam::data {

// Empty, numeric or categorical cell.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

// ---------------------------------------------------------------- text I/O

// Splits delimited text into records. Quoted fields may contain the
// delimiter, doubled quotes and newlines. Returns records with the 1-based
// line each one started on.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> split_records(const std::string& text,
                                                                                     char delim = ',') {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t line = 1, rec_line = 1;
  auto end_field = [&] {
    rec.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(rec.size() == 1 && rec[0].empty())) out.emplace_back(rec_line, rec);
    rec.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && !field_started && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (ch == delim) {
      end_field();
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
      rec_line = line;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", rec_line);
  if (!field.empty() || !rec.empty()) end_record();
  return out;
}

inline std::string quote_field(const std::string& s, char delim = ',') {
  if (s.find_first_of(std::string("\"\r\n") + delim) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline bool is_missing_text(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- raw table

// Typed table in schema column order.
struct RawTable {
  std::vector<std::string> ids;
  std::vector<std::optional<int>> labels;
  std::vector<std::vector<Cell>> rows;

  std::size_t size() const { return rows.size(); }

  RawTable subset(std::span<const std::size_t> idx) const {
    RawTable out;
    for (std::size_t i : idx) {
      out.ids.push_back(ids[i]);
      out.labels.push_back(labels[i]);
      out.rows.push_back(rows[i]);
    }
    return out;
  }
};

struct LoadReport {
  std::size_t rows = 0;
  std::map<std::string, std::size_t> missing;
};

inline Cell parse_cell(const FeatureSpec& f, const std::string& text, std::size_t row, std::size_t col) {
  if (is_missing_text(text)) return std::monostate{};
  if (f.kind == Kind::categorical) return text;
  const auto v = parse_double(text);
  if (!v) throw ParseError("cannot parse '" + text + "' as a number for feature '" + f.name + "'", row, col);
  return *v;
}

// Parses a header-first delimited table. The header must hold the id column,
// every schema column, and optionally the label column, in any order.
inline RawTable parse_delimited(const std::string& text, const FeatureSchema& schema, LoadReport* report = nullptr,
                                char delim = ',') {
  const auto records = split_records(text, delim);
  if (records.empty()) throw ParseError("empty table: missing header row", 1);
  const auto cols = schema.columns();
  const auto& header = records.front().second;
  std::map<std::string, std::size_t> pos;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (!pos.emplace(name, c).second) throw ParseError("duplicate header '" + name + "'", 1, c + 1);
    const bool known = name == schema.id_column || name == schema.label_column ||
                       std::any_of(cols.begin(), cols.end(), [&](const FeatureSpec& f) { return f.name == name; });
    if (!known) throw ParseError("unknown header '" + name + "'", 1, c + 1);
  }
  if (!pos.count(schema.id_column)) throw ParseError("header lacks id column '" + schema.id_column + "'", 1);
  for (const auto& f : cols) {
    if (!pos.count(f.name)) throw ParseError("header lacks feature column '" + f.name + "'", 1);
  }
  const auto label_pos = pos.count(schema.label_column) ? std::optional<std::size_t>(pos[schema.label_column])
                                                        : std::nullopt;
  RawTable t;
  LoadReport rep;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, rec] = records[r];
    if (rec.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(rec.size()),
                       line);
    }
    t.ids.push_back(rec[pos[schema.id_column]]);
    if (label_pos) {
      const auto& s = rec[*label_pos];
      if (is_missing_text(s)) {
        t.labels.push_back(std::nullopt);
      } else if (s == "0" || s == "1") {
        t.labels.push_back(s == "1" ? 1 : 0);
      } else {
        throw ParseError("label must be 0 or 1, got '" + s + "'", line, *label_pos + 1);
      }
    } else {
      t.labels.push_back(std::nullopt);
    }
    std::vector<Cell> row;
    row.reserve(cols.size());
    for (const auto& f : cols) {
      const std::size_t c = pos[f.name];
      row.push_back(parse_cell(f, rec[c], line, c + 1));
      if (is_missing(row.back())) ++rep.missing[f.name];
    }
    t.rows.push_back(std::move(row));
  }
  rep.rows = t.rows.size();
  if (report) *report = rep;
  return t;
}

inline RawTable load_delimited(const std::string& path, const FeatureSchema& schema, LoadReport* report = nullptr,
                               char delim = ',') {
  try {
    return parse_delimited(read_file(path), schema, report, delim);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_delimited(std::ostream& os, const FeatureSchema& schema, const RawTable& t, bool with_labels = true) {
  const auto cols = schema.columns();
  os << quote_field(schema.id_column);
  if (with_labels) os << ',' << quote_field(schema.label_column);
  for (const auto& f : cols) os << ',' << quote_field(f.name);
  os << '\n';
  for (std::size_t r = 0; r < t.size(); ++r) {
    os << quote_field(t.ids[r]);
    if (with_labels) os << ',' << (t.labels[r] ? std::to_string(*t.labels[r]) : std::string());
    for (const auto& c : t.rows[r]) {
      os << ',';
      if (const auto* d = std::get_if<double>(&c)) os << format_double(*d);
      if (const auto* s = std::get_if<std::string>(&c)) os << quote_field(*s);
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------- statistics

struct NumericStats {
  std::string name;
  Role role = Role::static_feature;
  double mean = 0.0;
  double std = 1.0;  // population standard deviation
  double median = 0.0;
  double p1 = 0.0;
  double p99 = 0.0;
  bool constant = false;           // dropped from the model
  bool missing_indicator = false;  // has a 0/1 companion column

  friend bool operator==(const NumericStats&, const NumericStats&) = default;
};

struct CategoricalStats {
  std::string name;
  std::vector<std::string> levels;  // code i is levels[i]; code levels.size() is "unknown"

  std::size_t unknown_code() const { return levels.size(); }
  std::size_t cardinality() const { return levels.size() + 1; }
  std::optional<std::size_t> code(const std::string& level) const {
    const auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
  }
  friend bool operator==(const CategoricalStats&, const CategoricalStats&) = default;
};

struct FitOptions {
  // Levels seen fewer times than this in the training split share the
  // unknown code, so its embedding row is trained.
  std::size_t min_level_count = 5;
  bool allow_unknown = true;
};

struct StandardizationStats {
  std::vector<NumericStats> numeric;           // numeric and ordinal columns in schema order
  std::vector<CategoricalStats> categorical;   // categorical columns in schema order
  bool allow_unknown = true;

  const NumericStats* find_numeric(const std::string& name) const {
    for (const auto& s : numeric) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
  const CategoricalStats* find_categorical(const std::string& name) const {
    for (const auto& s : categorical) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  std::vector<const NumericStats*> active(Role role) const {
    std::vector<const NumericStats*> out;
    for (const auto& s : numeric) {
      if (s.role == role && !s.constant) out.push_back(&s);
    }
    return out;
  }

  std::vector<std::string> static_numeric_columns() const {
    std::vector<std::string> out;
    for (const auto* s : active(Role::static_feature)) out.push_back(s->name);
    for (const auto& s : numeric) {
      if (s.missing_indicator && !s.constant) out.push_back(s.name + "_missing");
    }
    return out;
  }
  std::vector<std::string> tv_columns() const {
    std::vector<std::string> out;
    for (const auto* s : active(Role::time_varying)) out.push_back(s->name);
    return out;
  }

  friend bool operator==(const StandardizationStats&, const StandardizationStats&) = default;
};

inline double standardize(const NumericStats& s, double x) { return (x - s.mean) / s.std; }
inline double destandardize(const NumericStats& s, double z) { return z * s.std + s.mean; }

// Linear interpolation between order statistics of a sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(sorted.size() - 1, lo + 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct FitWarnings {
  std::vector<std::string> constant_columns;
};

// Statistics from the training split only. Missing numerics are imputed with
// the median before mean and spread are taken, so the standardized training
// columns have mean 0 and unit spread exactly.
inline StandardizationStats fit_stats(const FeatureSchema& schema, const RawTable& train, const FitOptions& opt = {},
                                      FitWarnings* warnings = nullptr) {
  if (train.size() == 0) throw InvalidArgument("cannot fit statistics on an empty training split");
  const auto cols = schema.columns();
  StandardizationStats st;
  st.allow_unknown = opt.allow_unknown;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& f = cols[c];
    if (f.kind == Kind::categorical) {
      std::map<std::string, std::size_t> counts;
      for (const auto& row : train.rows) {
        if (const auto* s = std::get_if<std::string>(&row[c])) ++counts[*s];
      }
      CategoricalStats cs;
      cs.name = f.name;
      if (!f.levels.empty()) {
        for (const auto& l : f.levels) {
          if (counts[l] >= opt.min_level_count) cs.levels.push_back(l);
        }
      } else {
        for (const auto& [l, n] : counts) {
          if (n >= opt.min_level_count) cs.levels.push_back(l);
        }
      }
      st.categorical.push_back(cs);
      continue;
    }
    NumericStats ns;
    ns.name = f.name;
    ns.role = f.role;
    std::vector<double> observed;
    for (const auto& row : train.rows) {
      if (const auto* d = std::get_if<double>(&row[c])) observed.push_back(*d);
    }
    ns.missing_indicator = observed.size() < train.size();
    if (observed.empty()) {
      ns.constant = true;
    } else {
      std::sort(observed.begin(), observed.end());
      ns.median = quantile_sorted(observed, 0.5);
      ns.p1 = quantile_sorted(observed, 0.01);
      ns.p99 = quantile_sorted(observed, 0.99);
      const double n = static_cast<double>(train.size());
      const double n_missing = n - static_cast<double>(observed.size());
      double sum = n_missing * ns.median;
      for (double v : observed) sum += v;
      ns.mean = sum / n;
      double ss = n_missing * (ns.median - ns.mean) * (ns.median - ns.mean);
      for (double v : observed) ss += (v - ns.mean) * (v - ns.mean);
      ns.std = std::sqrt(ss / n);
      if (!(ns.std > 1e-12 * std::max(1.0, std::abs(ns.mean)))) {
        ns.constant = true;
        ns.std = 1.0;
      }
    }
    if (ns.constant && warnings) warnings->constant_columns.push_back(f.name);
    st.numeric.push_back(ns);
  }
  return st;
}

// Model input layout implied by the statistics; hyperparameters are left at
// their defaults.
inline FGamConfig model_layout(const StandardizationStats& st) {
  FGamConfig c;
  c.static_numeric = st.static_numeric_columns().size();
  for (const auto& cs : st.categorical) c.static_cardinalities.push_back(cs.cardinality());
  c.d_tv = st.tv_columns().size();
  return c;
}

inline FGamConfig apply_layout(FGamConfig hyper, const StandardizationStats& st) {
  const auto l = model_layout(st);
  hyper.static_numeric = l.static_numeric;
  hyper.static_cardinalities = l.static_cardinalities;
  hyper.d_tv = l.d_tv;
  return hyper;
}

// ---------------------------------------------------------------- encoding

// Encodes one row given in schema column order.
inline Example encode_row(const FeatureSchema& schema, const StandardizationStats& st, std::span<const Cell> row) {
  const auto cols = schema.columns();
  if (row.size() != cols.size()) throw DimensionError("row has " + std::to_string(row.size()) + " cells, schema has " +
                                                      std::to_string(cols.size()));
  Example e;
  std::vector<double> indicators;
  std::size_t ni = 0, ci = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& f = cols[c];
    if (f.kind == Kind::categorical) {
      const auto& cs = st.categorical.at(ci++);
      if (const auto* s = std::get_if<std::string>(&row[c])) {
        const auto code = cs.code(*s);
        if (code) {
          e.static_codes.push_back(*code);
        } else if (st.allow_unknown) {
          e.static_codes.push_back(cs.unknown_code());
        } else {
          throw UnknownLevelError(f.name, *s);
        }
      } else if (is_missing(row[c])) {
        e.static_codes.push_back(cs.unknown_code());
      } else {
        throw InvalidArgument("categorical feature '" + f.name + "' given a number");
      }
      continue;
    }
    const auto& ns = st.numeric.at(ni++);
    if (std::holds_alternative<std::string>(row[c])) {
      throw InvalidArgument("numeric feature '" + f.name + "' given text");
    }
    if (ns.constant) continue;
    const auto* d = std::get_if<double>(&row[c]);
    if (d && !std::isfinite(*d)) throw InvalidArgument("feature '" + f.name + "' is not finite");
    const double z = standardize(ns, d ? *d : ns.median);
    (f.role == Role::static_feature ? e.static_numeric : e.tv).push_back(z);
    if (ns.missing_indicator) indicators.push_back(d ? 0.0 : 1.0);
  }
  e.static_numeric.insert(e.static_numeric.end(), indicators.begin(), indicators.end());
  return e;
}

inline ModelInput stack_examples(std::span<const Example> ex, std::size_t static_cols, std::size_t n_cat,
                                 std::size_t tv_cols) {
  ModelInput in;
  in.static_numeric = Matrix(ex.size(), static_cols);
  in.tv = Matrix(ex.size(), tv_cols);
  in.n_categorical = n_cat;
  in.static_codes.reserve(ex.size() * n_cat);
  for (std::size_t r = 0; r < ex.size(); ++r) {
    std::copy(ex[r].static_numeric.begin(), ex[r].static_numeric.end(), in.static_numeric.row(r).begin());
    std::copy(ex[r].tv.begin(), ex[r].tv.end(), in.tv.row(r).begin());
    in.static_codes.insert(in.static_codes.end(), ex[r].static_codes.begin(), ex[r].static_codes.end());
  }
  return in;
}

// Encodes a whole table. Rows without a label are rejected when labels are required.
inline TabularDataset encode_table(const FeatureSchema& schema, const StandardizationStats& st, const RawTable& t,
                                   bool require_labels = true) {
  const auto layout = model_layout(st);
  std::vector<Example> ex;
  ex.reserve(t.size());
  TabularDataset d;
  for (std::size_t r = 0; r < t.size(); ++r) {
    try {
      ex.push_back(encode_row(schema, st, t.rows[r]));
    } catch (const UnknownLevelError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(std::string(e.what()) + " in case '" + t.ids[r] + "'", r + 2);
    }
    if (t.labels[r]) {
      d.labels.push_back(*t.labels[r]);
    } else if (require_labels) {
      throw ParseError("case '" + t.ids[r] + "' has no label", r + 2);
    } else {
      d.labels.push_back(0);
    }
    d.ids.push_back(t.ids[r]);
  }
  d.x = stack_examples(ex, layout.static_numeric, layout.n_categorical(), layout.d_tv);
  d.validate();
  return d;
}

// ---------------------------------------------------------------- JSON

inline json to_json(const StandardizationStats& st) {
  json j;
  j["allow_unknown"] = st.allow_unknown;
  j["numeric"] = json::array();
  for (const auto& s : st.numeric) {
    j["numeric"].push_back({{"name", s.name},
                            {"role", to_string(s.role)},
                            {"mean", s.mean},
                            {"std", s.std},
                            {"median", s.median},
                            {"p1", s.p1},
                            {"p99", s.p99},
                            {"constant", s.constant},
                            {"missing_indicator", s.missing_indicator}});
  }
  j["categorical"] = json::array();
  for (const auto& c : st.categorical) j["categorical"].push_back({{"name", c.name}, {"levels", c.levels}});
  return j;
}

inline StandardizationStats stats_from_json(const json& j) {
  try {
    StandardizationStats st;
    st.allow_unknown = j.at("allow_unknown").get<bool>();
    for (const auto& s : j.at("numeric")) {
      NumericStats ns;
      ns.name = s.at("name").get<std::string>();
      ns.role = role_from_string(s.at("role").get<std::string>());
      ns.mean = s.at("mean").get<double>();
      ns.std = s.at("std").get<double>();
      ns.median = s.at("median").get<double>();
      ns.p1 = s.at("p1").get<double>();
      ns.p99 = s.at("p99").get<double>();
      ns.constant = s.at("constant").get<bool>();
      ns.missing_indicator = s.at("missing_indicator").get<bool>();
      if (!(ns.std > 0.0)) throw InvalidArgument("standard deviation of '" + ns.name + "' must be positive");
      st.numeric.push_back(ns);
    }
    for (const auto& c : j.at("categorical")) {
      st.categorical.push_back({c.at("name").get<std::string>(), c.at("levels").get<std::vector<std::string>>()});
    }
    return st;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid standardization statistics: ") + e.what());
  }
}

// Checks that statistics were fitted for this schema.
inline void check_stats_match(const FeatureSchema& schema, const StandardizationStats& st) {
  std::size_t ni = 0, ci = 0;
  for (const auto& f : schema.columns()) {
    if (f.kind == Kind::categorical) {
      if (ci >= st.categorical.size() || st.categorical[ci].name != f.name) {
        throw InvalidArgument("statistics do not cover categorical feature '" + f.name + "'");
      }
      ++ci;
    } else {
      if (ni >= st.numeric.size() || st.numeric[ni].name != f.name || st.numeric[ni].role != f.role) {
        throw InvalidArgument("statistics do not cover feature '" + f.name + "'");
      }
      ++ni;
    }
  }
  if (ni != st.numeric.size() || ci != st.categorical.size()) {
    throw InvalidArgument("statistics describe columns missing from the schema");
  }
}

inline json to_json(const TabularDataset& d) {
  json j;
  j["ids"] = d.ids;
  j["labels"] = d.labels;
  j["static_numeric"] = {{"cols", d.x.static_numeric.cols()}, {"values", std::vector<double>(d.x.static_numeric.values().begin(), d.x.static_numeric.values().end())}};
  j["n_categorical"] = d.x.n_categorical;
  j["static_codes"] = d.x.static_codes;
  j["tv"] = {{"cols", d.x.tv.cols()}, {"values", std::vector<double>(d.x.tv.values().begin(), d.x.tv.values().end())}};
  return j;
}

inline TabularDataset dataset_from_json(const json& j) {
  TabularDataset d;
  d.ids = j.at("ids").get<std::vector<std::string>>();
  d.labels = j.at("labels").get<std::vector<int>>();
  const std::size_t n = d.labels.size();
  auto matrix = [n](const json& m) {
    const auto cols = m.at("cols").get<std::size_t>();
    const auto values = m.at("values").get<std::vector<double>>();
    if (values.size() != n * cols) throw ParseError("matrix size does not match row count");
    return Matrix::from_values(n, cols, values);
  };
  d.x.static_numeric = matrix(j.at("static_numeric"));
  d.x.n_categorical = j.at("n_categorical").get<std::size_t>();
  d.x.static_codes = j.at("static_codes").get<std::vector<std::size_t>>();
  d.x.tv = matrix(j.at("tv"));
  d.validate();
  return d;
}

inline constexpr const char* kDatasetFormat = "fgam-dataset";
inline constexpr int kDatasetVersion = 1;

struct DatasetCache {
  FeatureSchema schema;
  StandardizationStats stats;
  std::uint64_t split_seed = 0;
  TabularDataset train;
  TabularDataset valid;
  TabularDataset test;
};

inline void write_cache(std::ostream& os, const DatasetCache& c) {
  json j;
  j["format"] = kDatasetFormat;
  j["version"] = kDatasetVersion;
  j["schema"] = to_json(c.schema);
  j["stats"] = to_json(c.stats);
  j["split_seed"] = c.split_seed;
  j["splits"] = {{"train", to_json(c.train)}, {"valid", to_json(c.valid)}, {"test", to_json(c.test)}};
  os << j.dump() << '\n';
}

inline DatasetCache read_cache(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset cache is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kDatasetFormat) throw ParseError("not a dataset cache file");
    const int v = j.at("version").get<int>();
    if (v != kDatasetVersion) {
      throw ParseError("unsupported dataset cache version " + std::to_string(v) + " (expected " +
                       std::to_string(kDatasetVersion) + ")");
    }
    DatasetCache c;
    c.schema = schema_from_json(j.at("schema"));
    c.stats = stats_from_json(j.at("stats"));
    check_stats_match(c.schema, c.stats);
    c.split_seed = j.at("split_seed").get<std::uint64_t>();
    c.train = dataset_from_json(j.at("splits").at("train"));
    c.valid = dataset_from_json(j.at("splits").at("valid"));
    c.test = dataset_from_json(j.at("splits").at("test"));
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed dataset cache: ") + e.what());
  }
}

inline DatasetCache load_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset cache '" + path + "'");
  return read_cache(in);
}

}  // namespace fgam::data
