#pragma once

// HTTP serving layer. Handlers are pure functions of an immutable model
// snapshot and the request body; the server binds them to routes and can
// swap the snapshot between requests.
//
// Request payloads carry raw (clinical unit) values:
//   {"static": {"age": 61, "sex": "F"}, "time_varying": {"map_mean": 72.5}}
// Every schema feature must be present; null marks a missing value, which
// goes through the same imputation as training data.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fgam/data/dataset.hpp"
#include "fgam/data/schema.hpp"
#include "fgam/error.hpp"
#include "fgam/io/model_file.hpp"
#include "fgam/model.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fgam::service {

using nlohmann::json;

struct Response {
  int status = 200;
  json body;
};

inline constexpr std::size_t kDefaultCurvePoints = 50;
inline constexpr std::size_t kMaxCurvePoints = 1000;
// Inputs further than this many training standard deviations from the mean
// are rejected as out of range.
inline constexpr double kMaxAbsStandardized = 1e6;

// Loaded model plus lookups derived from it.
class Snapshot {
 public:
  explicit Snapshot(io::LoadedModel m) : model_(std::move(m.model)), version_(std::move(m.version)) {
    columns_ = model_.schema.columns();
    std::size_t ni = 0, tv = 0;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      index_[columns_[c].name] = c;
      if (columns_[c].kind == data::Kind::categorical) continue;
      const auto& ns = model_.stats.numeric.at(ni++);
      if (ns.role == data::Role::time_varying && !ns.constant) tv_index_[ns.name] = tv++;
    }
  }

  const io::ModelFile& model() const { return model_; }
  const FGamParams& params() const { return model_.params; }
  const std::string& version() const { return version_; }
  const std::vector<data::FeatureSpec>& columns() const { return columns_; }
  std::optional<std::size_t> column(const std::string& name) const {
    const auto it = index_.find(name);
    return it == index_.end() ? std::nullopt : std::optional(it->second);
  }
  // Position among the model's time-varying inputs.
  std::optional<std::size_t> tv_position(const std::string& name) const {
    const auto it = tv_index_.find(name);
    return it == tv_index_.end() ? std::nullopt : std::optional(it->second);
  }
  std::vector<std::string> tv_names() const { return model_.stats.tv_columns(); }

 private:
  io::ModelFile model_;
  std::string version_;
  std::vector<data::FeatureSpec> columns_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::size_t> tv_index_;
};

namespace detail {

inline Response error(const Snapshot& s, int status, const std::string& message, const json& fields = json::object()) {
  return {status, {{"error", message}, {"fields", fields}, {"model_version", s.version()}}};
}

struct Parsed {
  std::vector<data::Cell> cells;
  json field_errors = json::object();
  std::optional<std::string> body_error;
  json body;
};

inline Parsed parse_payload(const Snapshot& s, const std::string& text, const std::set<std::string>& extra_keys) {
  Parsed p;
  try {
    p.body = json::parse(text);
  } catch (const json::exception&) {
    p.body_error = "request body is not valid JSON";
    return p;
  }
  if (!p.body.is_object()) {
    p.body_error = "request body must be a JSON object";
    return p;
  }
  for (const auto& [k, v] : p.body.items()) {
    if (k != "static" && k != "time_varying" && !extra_keys.count(k)) p.field_errors[k] = "unknown top-level key";
  }
  const auto& cols = s.columns();
  p.cells.assign(cols.size(), data::Cell{});
  std::vector<bool> seen(cols.size(), false);
  for (const char* group : {"static", "time_varying"}) {
    if (!p.body.contains(group)) {
      p.field_errors[group] = "required object is missing";
      continue;
    }
    const auto& obj = p.body.at(group);
    if (!obj.is_object()) {
      p.field_errors[group] = "must be an object";
      continue;
    }
    const auto role = std::string(group) == "static" ? data::Role::static_feature : data::Role::time_varying;
    for (const auto& [name, v] : obj.items()) {
      const auto c = s.column(name);
      if (!c) {
        p.field_errors[name] = "unknown field";
        continue;
      }
      const auto& f = cols[*c];
      if (f.role != role) {
        p.field_errors[name] = std::string("belongs under '") +
                               (f.role == data::Role::static_feature ? "static" : "time_varying") + "'";
        continue;
      }
      seen[*c] = true;
      if (v.is_null()) continue;
      if (f.kind == data::Kind::categorical) {
        if (!v.is_string()) {
          p.field_errors[name] = "expected a string level or null";
          continue;
        }
        p.cells[*c] = v.get<std::string>();
      } else {
        if (!v.is_number()) {
          p.field_errors[name] = "expected a number or null";
          continue;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
          p.field_errors[name] = "must be finite";
          continue;
        }
        p.cells[*c] = d;
      }
    }
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (!seen[c] && !p.field_errors.contains(cols[c].name) &&
        !p.field_errors.contains(cols[c].role == data::Role::static_feature ? "static" : "time_varying")) {
      p.field_errors[cols[c].name] = "required field is missing";
    }
  }
  return p;
}

// Validated, encoded example or an error response.
inline std::pair<std::optional<Example>, Response> encode_payload(const Snapshot& s, const std::string& text,
                                                                  const std::set<std::string>& extra_keys,
                                                                  Parsed* parsed = nullptr) {
  auto p = parse_payload(s, text, extra_keys);
  if (p.body_error) return {std::nullopt, error(s, 400, *p.body_error)};
  if (!p.field_errors.empty()) return {std::nullopt, error(s, 400, "validation failed", p.field_errors)};
  try {
    auto ex = data::encode_row(s.model().schema, s.model().stats, p.cells);
    json range_errors = json::object();
    std::size_t ni = 0;
    for (std::size_t c = 0; c < p.cells.size(); ++c) {
      if (s.columns()[c].kind == data::Kind::categorical) continue;
      const auto& ns = s.model().stats.numeric.at(ni++);
      const auto* d = std::get_if<double>(&p.cells[c]);
      if (d && !ns.constant && !(std::abs(data::standardize(ns, *d)) <= kMaxAbsStandardized)) {
        range_errors[ns.name] = "value is out of range";
      }
    }
    if (!range_errors.empty()) return {std::nullopt, error(s, 400, "validation failed", range_errors)};
    if (parsed) *parsed = std::move(p);
    return {std::move(ex), {}};
  } catch (const UnknownLevelError& e) {
    return {std::nullopt, error(s, 422, e.what(), json{{e.feature(), "unknown level"}})};
  }
}

}  // namespace detail

inline Response handle_health(const Snapshot& s) { return {200, {{"status", "ok"}, {"model_version", s.version()}}}; }

inline Response handle_schema(const Snapshot& s) {
  json features = json::array();
  std::size_t ni = 0, ci = 0;
  for (const auto& f : s.columns()) {
    json jf{{"name", f.name},
            {"role", data::to_string(f.role)},
            {"kind", data::to_string(f.kind)},
            {"unit", f.unit},
            {"modifiable", f.modifiable()}};
    if (f.kind == data::Kind::categorical) {
      jf["levels"] = s.model().stats.categorical.at(ci++).levels;
      jf["used"] = true;
    } else {
      const auto& ns = s.model().stats.numeric.at(ni++);
      jf["range"] = {{"p1", ns.p1}, {"p99", ns.p99}, {"mean", ns.mean}, {"median", ns.median}, {"std", ns.std}};
      jf["used"] = !ns.constant;
    }
    features.push_back(jf);
  }
  return {200,
          {{"features", features},
           {"allow_unknown_levels", s.model().stats.allow_unknown},
           {"model_version", s.version()}}};
}

inline Response handle_predict(const Snapshot& s, const std::string& body) {
  auto [ex, err] = detail::encode_payload(s, body, {});
  if (!ex) return err;
  const auto st = forward_batch(s.params(), ex->as_batch(), Mode::eval);
  return {200, {{"probability", sigmoid(st.logits[0])}, {"logit", st.logits[0]}, {"model_version", s.version()}}};
}

inline Response handle_contributions(const Snapshot& s, const std::string& body) {
  auto [ex, err] = detail::encode_payload(s, body, {});
  if (!ex) return err;
  const auto rep = contributions(s.params(), *ex);
  const auto names = s.tv_names();
  json raw = json::object(), display = json::object();
  for (std::size_t t = 0; t < names.size(); ++t) {
    raw[names[t]] = rep.contributions[t];
    display[names[t]] = rep.display_contributions[t];
  }
  return {200,
          {{"bias", rep.bias},
           {"contributions", raw},
           {"logit", rep.logit},
           {"probability", rep.probability},
           {"display_bias", rep.display_bias},
           {"display_contributions", display},
           {"features", names},
           {"model_version", s.version()}}};
}

// Body: payload plus "feature" and either "grid" (raw values) or "points"
// (count over the training p1..p99 range).
inline Response handle_curve(const Snapshot& s, const std::string& body) {
  detail::Parsed parsed;
  auto [ex, err] = detail::encode_payload(s, body, {"feature", "grid", "points"}, &parsed);
  if (!ex) return err;
  const auto& b = parsed.body;
  if (!b.contains("feature") || !b.at("feature").is_string()) {
    return detail::error(s, 400, "validation failed", json{{"feature", "required string naming a feature"}});
  }
  const auto name = b.at("feature").get<std::string>();
  const auto c = s.column(name);
  if (!c) return detail::error(s, 400, "validation failed", json{{"feature", "unknown feature '" + name + "'"}});
  if (!s.columns()[*c].modifiable()) {
    return detail::error(s, 400, "static features are non-modifiable and have no what-if curve",
                         json{{"feature", "'" + name + "' is static"}});
  }
  const auto t = s.tv_position(name);
  if (!t) return detail::error(s, 400, "validation failed", json{{"feature", "'" + name + "' is not used by the model"}});
  const auto* ns = s.model().stats.find_numeric(name);

  std::vector<double> raw;
  if (b.contains("grid")) {
    if (b.contains("points")) return detail::error(s, 400, "validation failed", json{{"grid", "give grid or points, not both"}});
    const auto& g = b.at("grid");
    if (!g.is_array() || g.empty() || g.size() > kMaxCurvePoints) {
      return detail::error(s, 400, "validation failed",
                           json{{"grid", "must be a non-empty array of at most " + std::to_string(kMaxCurvePoints) +
                                             " numbers"}});
    }
    for (const auto& v : g) {
      if (!v.is_number() || !(std::abs(data::standardize(*ns, v.get<double>())) <= kMaxAbsStandardized)) {
        return detail::error(s, 400, "validation failed", json{{"grid", "entries must be finite numbers in range"}});
      }
      raw.push_back(v.get<double>());
    }
  } else {
    std::size_t n = kDefaultCurvePoints;
    if (b.contains("points")) {
      const auto& p = b.at("points");
      if (!p.is_number_integer() || p.get<long long>() < 2 || p.get<long long>() > static_cast<long long>(kMaxCurvePoints)) {
        return detail::error(s, 400, "validation failed",
                             json{{"points", "must be an integer in [2, " + std::to_string(kMaxCurvePoints) + "]"}});
      }
      n = p.get<std::size_t>();
    }
    for (std::size_t i = 0; i < n; ++i) {
      raw.push_back(ns->p1 + (ns->p99 - ns->p1) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  }
  std::vector<double> grid(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) grid[i] = data::standardize(*ns, raw[i]);
  const auto curve = contribution_curve(s.params(), *ex, *t, grid);
  const auto rep = contributions(s.params(), *ex);
  const double current_z = ex->tv[*t];
  json points = json::array();
  for (std::size_t i = 0; i < curve.size(); ++i) points.push_back({{"value", raw[i]}, {"contribution", curve[i].contribution}});
  return {200,
          {{"feature", name},
           {"points", points},
           {"current", {{"value", data::destandardize(*ns, current_z)}, {"contribution", rep.contributions[*t]}}},
           {"display_offset", rep.contributions[*t] - rep.display_contributions[*t]},
           {"model_version", s.version()}}};
}

// Routes requests to handlers over the current snapshot. Reload swaps the
// snapshot between requests; in-flight requests keep the one they started with.
class ModelService {
 public:
  explicit ModelService(io::LoadedModel m) : snap_(std::make_shared<const Snapshot>(std::move(m))) {}

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return snap_;
  }

  void reload(io::LoadedModel m) {
    auto next = std::make_shared<const Snapshot>(std::move(m));
    std::lock_guard<std::mutex> lock(mu_);
    snap_ = std::move(next);
  }

  Response handle(const std::string& method, const std::string& path, const std::string& body) const {
    ++requests_;
    const auto s = snapshot();
    Response r;
    try {
      r = route(*s, method, path, body);
    } catch (const std::exception& e) {
      r = detail::error(*s, 500, std::string("internal error: ") + e.what());
    }
    if (r.status >= 500) ++internal_errors_;
    return r;
  }

  std::uint64_t requests() const { return requests_; }
  std::uint64_t internal_errors() const { return internal_errors_; }

 private:
  static Response route(const Snapshot& s, const std::string& method, const std::string& path, const std::string& body) {
    static const std::set<std::string> get_routes{"/schema", "/health"};
    static const std::set<std::string> post_routes{"/predict", "/contributions", "/curve"};
    if (get_routes.count(path)) {
      if (method != "GET") return detail::error(s, 405, "use GET for " + path);
      return path == "/schema" ? handle_schema(s) : handle_health(s);
    }
    if (post_routes.count(path)) {
      if (method != "POST") return detail::error(s, 405, "use POST for " + path);
      if (path == "/predict") return handle_predict(s, body);
      if (path == "/contributions") return handle_contributions(s, body);
      return handle_curve(s, body);
    }
    return detail::error(s, 404, "no route for " + path);
  }

  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snap_;
  mutable std::atomic<std::uint64_t> requests_{0};
  mutable std::atomic<std::uint64_t> internal_errors_{0};
};

// Registers the API routes, and optionally a static asset directory, on `srv`.
inline void bind_routes(httplib::Server& srv, const ModelService& svc, const std::string& static_dir = "") {
  auto adapt = [&svc](const std::string& method) {
    return [&svc, method](const httplib::Request& req, httplib::Response& res) {
      const auto r = svc.handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
      res.set_header("X-Model-Version", r.body.value("model_version", std::string{}));
    };
  };
  for (const char* p : {"/schema", "/health", "/predict", "/contributions", "/curve"}) {
    srv.Get(p, adapt("GET"));
    srv.Post(p, adapt("POST"));
  }
  if (!static_dir.empty() && !srv.set_mount_point("/", static_dir)) {
    throw Error("static asset directory '" + static_dir + "' does not exist");
  }
}

}  // namespace fgam::service
