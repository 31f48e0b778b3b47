#pragma once

// Builds the wide per-case table from a case file (one row per surgery) and
// a long-format series file (case_id, channel, t_seconds, value), labels the
// outcome, and turns tables into split, standardized dataset caches.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fgam/data/dataset.hpp"
#include "fgam/data/labels.hpp"
#include "fgam/data/schema.hpp"
#include "fgam/data/summarize.hpp"
#include "fgam/error.hpp"
#include "fgam/training.hpp"

namespace fgam::data {

enum class OutcomeSource { label_column, aki, arf };

inline OutcomeSource outcome_from_string(const std::string& s) {
  if (s == "label") return OutcomeSource::label_column;
  if (s == "aki") return OutcomeSource::aki;
  if (s == "arf") return OutcomeSource::arf;
  throw InvalidArgument("unknown outcome '" + s + "' (expected label, aki or arf)");
}

struct IngestOptions {
  OutcomeSource outcome = OutcomeSource::label_column;
  std::string duration_column = "duration_seconds";
  // Postoperative creatinine arrives as a series channel timed from the end of surgery.
  std::string creatinine_channel = "postop_creatinine";
  std::string preop_creatinine_column = "preop_creatinine";
  std::string preop_creatinine_age_column = "preop_creatinine_age_days";
  std::string dialysis_column = "on_dialysis";
  std::string ventilation_hours_column = "ventilation_hours_post";
  std::string reintubated_column = "reintubated_48h";
  std::string preop_ventilated_column = "ventilated_preop";
  std::string second_surgery_column = "second_surgery_48h";
  std::string died_column = "died_48h";
};

using SeriesByChannel = std::map<std::string, std::vector<Sample>>;

// Cells of one case file row keyed by header name.
struct CaseRecord {
  std::string id;
  std::size_t line = 0;
  std::map<std::string, std::string> cells;

  const std::string* get(const std::string& k) const {
    const auto it = cells.find(k);
    return it == cells.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline std::optional<double> number_cell(const CaseRecord& c, const std::string& column, bool required) {
  const auto* s = c.get(column);
  if (!s) {
    if (required) throw ParseError("case file lacks column '" + column + "'", c.line);
    return std::nullopt;
  }
  if (is_missing_text(*s)) return std::nullopt;
  const auto v = parse_double(*s);
  if (!v) throw ParseError("cannot parse '" + *s + "' in column '" + column + "' of case '" + c.id + "'", c.line);
  return v;
}

inline bool flag_cell(const CaseRecord& c, const std::string& column) {
  const auto v = number_cell(c, column, true);
  if (!v) return false;
  if (*v != 0.0 && *v != 1.0) throw ParseError("column '" + column + "' must be 0 or 1 in case '" + c.id + "'", c.line);
  return *v == 1.0;
}

}  // namespace detail

inline LabelResult label_case(const CaseRecord& c, const SeriesByChannel& series, const IngestOptions& opt) {
  switch (opt.outcome) {
    case OutcomeSource::label_column: return {Outcome::undefined, "no label"};
    case OutcomeSource::aki: {
      std::vector<CreatinineValue> post;
      const auto it = series.find(opt.creatinine_channel);
      if (it != series.end()) {
        for (const auto& s : it->second) post.push_back({s.t / 3600.0, s.value});
      }
      return label_aki(detail::number_cell(c, opt.preop_creatinine_column, true),
                       detail::number_cell(c, opt.preop_creatinine_age_column, true), post,
                       detail::flag_cell(c, opt.dialysis_column));
    }
    case OutcomeSource::arf: {
      RespiratoryCourse r;
      r.ventilation_hours_after_surgery = detail::number_cell(c, opt.ventilation_hours_column, true).value_or(0.0);
      r.reintubated_within_48h = detail::flag_cell(c, opt.reintubated_column);
      r.ventilated_before_surgery = detail::flag_cell(c, opt.preop_ventilated_column);
      r.second_surgery_within_48h = detail::flag_cell(c, opt.second_surgery_column);
      r.died_within_48h = detail::flag_cell(c, opt.died_column);
      return label_arf(r);
    }
  }
  return {Outcome::undefined, "no label"};
}

// Feature cells for one case in schema column order. Depends only on its arguments.
inline std::vector<Cell> summarize_case(const FeatureSchema& schema, const CaseRecord& c, const SeriesByChannel& series,
                                        const IngestOptions& opt) {
  std::optional<double> weight;
  if (!schema.weight_column.empty()) {
    weight = detail::number_cell(c, schema.weight_column, true);
    if (weight && !(*weight > 0.0)) weight.reset();
  }
  std::vector<Cell> row;
  for (const auto& f : schema.features) {
    const auto* s = c.get(f.name);
    if (!s) throw ParseError("case file lacks column '" + f.name + "'", c.line);
    Cell cell = parse_cell(f, *s, c.line, 0);
    if (f.per_kg) {
      if (const auto* d = std::get_if<double>(&cell)) {
        cell = weight ? Cell(*d / *weight) : Cell();
      }
    }
    row.push_back(cell);
  }
  if (schema.channels.empty() && !schema.compliance) return row;
  const auto duration = detail::number_cell(c, opt.duration_column, true);
  if (!duration || !(*duration > 0.0)) {
    throw ParseError("surgery duration must be positive in case '" + c.id + "'", c.line);
  }
  static const std::vector<Sample> none;
  auto channel = [&](const std::string& name) -> const std::vector<Sample>& {
    const auto it = series.find(name);
    return it == series.end() ? none : it->second;
  };
  for (const auto& ch : schema.channels) {
    for (const auto& v : summarize_channel(channel(ch.name), ch, *duration, weight)) {
      row.push_back(v.value ? Cell(*v.value) : Cell());
    }
  }
  if (schema.compliance) {
    const auto q = compliance(final_value(channel(schema.compliance->volume_channel), *duration),
                              final_value(channel(schema.compliance->pressure_channel), *duration));
    row.push_back(q ? Cell(*q) : Cell());
  }
  return row;
}

inline std::vector<CaseRecord> parse_cases(const std::string& text, const FeatureSchema& schema) {
  const auto records = split_records(text);
  if (records.empty()) throw ParseError("case file is empty", 1);
  const auto& header = records.front().second;
  const auto id_it = std::find(header.begin(), header.end(), schema.id_column);
  if (id_it == header.end()) throw ParseError("case file lacks id column '" + schema.id_column + "'", 1);
  const auto id_col = static_cast<std::size_t>(id_it - header.begin());
  std::vector<CaseRecord> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, rec] = records[r];
    if (rec.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(rec.size()),
                       line);
    }
    CaseRecord c;
    c.id = rec[id_col];
    c.line = line;
    for (std::size_t k = 0; k < header.size(); ++k) c.cells[header[k]] = rec[k];
    out.push_back(std::move(c));
  }
  return out;
}

struct SeriesReport {
  std::size_t samples = 0;
  std::size_t unknown_case_rows = 0;
};

// Long format: case_id, channel, t_seconds, value. Samples are ordered by
// time within each channel; ties keep file order.
inline std::map<std::string, SeriesByChannel> parse_series(const std::string& text, SeriesReport* report = nullptr) {
  const auto records = split_records(text);
  if (records.empty()) throw ParseError("series file is empty", 1);
  const auto& header = records.front().second;
  const std::array<std::string, 4> want{"case_id", "channel", "t_seconds", "value"};
  std::array<std::size_t, 4> col{};
  for (std::size_t k = 0; k < want.size(); ++k) {
    const auto it = std::find(header.begin(), header.end(), want[k]);
    if (it == header.end()) throw ParseError("series file lacks column '" + want[k] + "'", 1);
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::map<std::string, SeriesByChannel> out;
  SeriesReport rep;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, rec] = records[r];
    if (rec.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(rec.size()),
                       line);
    }
    const auto t = parse_double(rec[col[2]]);
    if (!t) throw ParseError("cannot parse time '" + rec[col[2]] + "'", line, col[2] + 1);
    if (is_missing_text(rec[col[3]])) continue;
    const auto v = parse_double(rec[col[3]]);
    if (!v) throw ParseError("cannot parse value '" + rec[col[3]] + "'", line, col[3] + 1);
    out[rec[col[0]]][rec[col[1]]].push_back({*t, *v});
    ++rep.samples;
  }
  for (auto& [id, chans] : out) {
    for (auto& [name, s] : chans) {
      std::stable_sort(s.begin(), s.end(), [](const Sample& a, const Sample& b) { return a.t < b.t; });
    }
  }
  if (report) *report = rep;
  return out;
}

struct IngestResult {
  RawTable table;
  LabelTally tally;
  SeriesReport series;
};

// Cases with an undefined outcome are left out of the table and counted
// in the tally. Rows come out ordered by case id.
inline IngestResult ingest_cases(const FeatureSchema& schema, const std::vector<CaseRecord>& cases,
                                 const std::map<std::string, SeriesByChannel>& series, const IngestOptions& opt) {
  schema.validate();
  std::vector<const CaseRecord*> order;
  for (const auto& c : cases) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const CaseRecord* a, const CaseRecord* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->id == order[i - 1]->id) throw ParseError("duplicate case id '" + order[i]->id + "'", order[i]->line);
  }
  IngestResult res;
  static const SeriesByChannel empty;
  for (const auto* c : order) {
    const auto it = series.find(c->id);
    const auto& s = it == series.end() ? empty : it->second;
    std::optional<int> label;
    if (opt.outcome == OutcomeSource::label_column) {
      const auto* cell = c->get(schema.label_column);
      if (cell && !is_missing_text(*cell)) {
        if (*cell != "0" && *cell != "1") throw ParseError("label must be 0 or 1 in case '" + c->id + "'", c->line);
        label = *cell == "1" ? 1 : 0;
        res.tally.add({label == 1 ? Outcome::positive : Outcome::negative, ""});
      } else {
        res.tally.add({Outcome::undefined, "no label"});
        continue;
      }
    } else {
      const auto r = label_case(*c, s, opt);
      res.tally.add(r);
      if (r.outcome == Outcome::undefined) continue;
      label = r.outcome == Outcome::positive ? 1 : 0;
    }
    res.table.ids.push_back(c->id);
    res.table.labels.push_back(label);
    res.table.rows.push_back(summarize_case(schema, *c, s, opt));
  }
  std::set<std::string> known;
  for (const auto& c : cases) known.insert(c.id);
  for (const auto& [id, chans] : series) {
    if (!known.count(id)) {
      for (const auto& [name, v] : chans) res.series.unknown_case_rows += v.size();
    }
  }
  return res;
}

// Splits a labelled table, fits statistics on the training rows only and
// encodes all three splits.
inline DatasetCache build_cache(const FeatureSchema& schema, const RawTable& table,
                                const std::array<double, 3>& fractions, std::uint64_t seed,
                                const FitOptions& fit = {}, FitWarnings* warnings = nullptr) {
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (!table.labels[r]) throw ParseError("case '" + table.ids[r] + "' has no label");
  }
  const auto idx = split_indices(table.size(), fractions, seed);
  const auto train_raw = table.subset(idx.train);
  DatasetCache c;
  c.schema = schema;
  c.split_seed = seed;
  c.stats = fit_stats(schema, train_raw, fit, warnings);
  c.train = encode_table(schema, c.stats, train_raw);
  c.valid = encode_table(schema, c.stats, table.subset(idx.valid));
  c.test = encode_table(schema, c.stats, table.subset(idx.test));
  return c;
}

}  // namespace fgam::data
