// fgam: generate, ingest, train, evaluate, explain and serve F-GAM models.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "fgam/data/ingest.hpp"
#include "fgam/data/synthetic.hpp"
#include "fgam/io/config.hpp"
#include "fgam/io/model_file.hpp"
#include "fgam/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json default_run_config() {
  auto model = fgam::io::to_json(fgam::FGamConfig{});
  // Input layout comes from the dataset.
  for (const char* k : {"static_numeric", "static_cardinalities", "d_tv"}) model.erase(k);
  return {
      {"data",
       {{"schema", ""},
        {"table", ""},
        {"cases", ""},
        {"series", ""},
        {"outcome", "label"},
        {"split_seed", 0},
        {"min_level_count", 5},
        {"allow_unknown", true},
        {"rows", 20000}}},
      {"model", model},
      {"training", fgam::io::to_json(fgam::TrainConfig{})},
      {"synthetic", fgam::data::to_json(fgam::data::default_interaction_spec())},
      {"explain", {{"points", 50}}},
      {"serve", {{"host", "127.0.0.1"}, {"port", 8080}, {"static_dir", ""}}},
  };
}

// Overlays `user` on the defaults. Unknown keys are errors so typos surface.
json merge_config(json base, const json& user, const std::string& where = "") {
  if (!user.is_object()) throw fgam::ParseError("config " + (where.empty() ? "root" : where) + " must be an object");
  for (const auto& [k, v] : user.items()) {
    const auto path = where.empty() ? k : where + "." + k;
    if (!base.contains(k)) throw fgam::ParseError("unknown config key '" + path + "'");
    if (path == "synthetic") {
      base[k] = v;
    } else if (base[k].is_object()) {
      base[k] = merge_config(base[k], v, path);
    } else {
      base[k] = v;
    }
  }
  return base;
}

json load_run_config(const std::string& path) {
  auto cfg = default_run_config();
  if (path.empty()) return cfg;
  const auto text = fgam::data::read_file(path);
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw fgam::ParseError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return merge_config(cfg, user);
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw fgam::InvalidArgument(what + " path is required");
  if (!fs::exists(path)) throw fgam::Error(what + " '" + path + "' does not exist");
}

template <class F>
void write_text(const fs::path& path, F&& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw fgam::Error("cannot write '" + path.string() + "'");
  body(os);
  if (!os) throw fgam::Error("failed writing '" + path.string() + "'");
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("fgam");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  const char* env = std::getenv("FGAM_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

struct Options {
  std::string config;
  std::string model;
  std::string data;
  std::string out;
  std::string split = "test";
  std::string case_id;
  std::optional<std::uint64_t> seed;
  std::optional<int> port;
  std::optional<std::size_t> rows;
};

fgam::data::FeatureSchema schema_for_table(const json& cfg, const std::string& table) {
  auto path = cfg["data"]["schema"].get<std::string>();
  if (path.empty()) path = (fs::path(table).parent_path() / "schema.json").string();
  require_file(path, "schema file");
  return fgam::data::schema_from_json(json::parse(fgam::data::read_file(path)));
}

int cmd_print_config(const json& cfg) {
  std::cout << cfg.dump(2) << '\n';
  return 0;
}

int cmd_generate(const json& cfg, const Options& o) {
  if (o.out.empty()) throw fgam::InvalidArgument("generate needs --out DIR");
  const auto spec = fgam::data::synthetic_spec_from_json(cfg["synthetic"]);
  const auto rows = o.rows.value_or(cfg["data"]["rows"].get<std::size_t>());
  const auto seed = o.seed.value_or(cfg["data"]["split_seed"].get<std::uint64_t>());
  spdlog::info("generating {} synthetic cases (seed {})", rows, seed);
  const auto syn = fgam::data::generate_synthetic(spec, rows, seed);
  const fs::path dir(o.out);
  write_text(dir / "schema.json", [&](std::ostream& os) { os << fgam::data::to_json(syn.schema).dump(2) << '\n'; });
  write_text(dir / "table.csv", [&](std::ostream& os) { fgam::data::write_delimited(os, syn.schema, syn.table); });
  write_text(dir / "synthetic.json", [&](std::ostream& os) {
    os << json{{"spec", fgam::data::to_json(spec)}, {"bias_offset", syn.truth.bias_offset}, {"seed", seed}}.dump(2)
       << '\n';
  });
  write_text(dir / "bayes.csv", [&](std::ostream& os) {
    os << syn.schema.id_column << ",bayes_probability\n";
    for (std::size_t r = 0; r < syn.table.size(); ++r) {
      os << syn.table.ids[r] << ',' << fgam::data::format_double(syn.truth.bayes_probability[r]) << '\n';
    }
  });
  std::size_t pos = 0;
  for (const auto& l : syn.table.labels) pos += l.value_or(0);
  spdlog::info("wrote {} ({} positives, {:.2f}%)", dir.string(), pos, 100.0 * pos / rows);
  return 0;
}

int cmd_ingest(const json& cfg, const Options& o) {
  const auto& d = cfg["data"];
  if (o.out.empty()) throw fgam::InvalidArgument("ingest needs --out FILE for the dataset cache");
  fgam::data::RawTable table;
  fgam::data::FeatureSchema schema;
  std::string cases = d["cases"].get<std::string>();
  std::string tablepath = o.data.empty() ? d["table"].get<std::string>() : o.data;
  if (!cases.empty() && o.data.empty()) {
    require_file(cases, "case file");
    const auto series_path = d["series"].get<std::string>();
    require_file(series_path, "series file");
    require_file(d["schema"].get<std::string>(), "schema file");
    schema = fgam::data::schema_from_json(json::parse(fgam::data::read_file(d["schema"].get<std::string>())));
    fgam::data::IngestOptions opt;
    opt.outcome = fgam::data::outcome_from_string(d["outcome"].get<std::string>());
    fgam::data::SeriesReport sr;
    const auto series = fgam::data::parse_series(fgam::data::read_file(series_path), &sr);
    const auto records = fgam::data::parse_cases(fgam::data::read_file(cases), schema);
    auto res = fgam::data::ingest_cases(schema, records, series, opt);
    spdlog::info("labelled {} cases: {} positive, {} negative, {} excluded", res.tally.total(), res.tally.positive,
                 res.tally.negative, res.tally.undefined);
    for (const auto& [why, n] : res.tally.exclusions) spdlog::info("  excluded ({}): {}", why, n);
    if (res.series.unknown_case_rows) spdlog::warn("{} series rows refer to unknown cases", res.series.unknown_case_rows);
    table = std::move(res.table);
  } else {
    require_file(tablepath, "data table");
    schema = schema_for_table(cfg, tablepath);
    fgam::data::LoadReport lr;
    table = fgam::data::load_delimited(tablepath, schema, &lr);
    spdlog::info("read {} rows from {}", lr.rows, tablepath);
    for (const auto& [col, n] : lr.missing) {
      if (n) spdlog::debug("  {}: {} missing", col, n);
    }
  }
  const auto tc = fgam::io::train_config_from_json(cfg["training"]);
  fgam::data::FitOptions fit;
  fit.min_level_count = d["min_level_count"].get<std::size_t>();
  fit.allow_unknown = d["allow_unknown"].get<bool>();
  const auto seed = o.seed.value_or(d["split_seed"].get<std::uint64_t>());
  fgam::data::FitWarnings warnings;
  const auto cache = fgam::data::build_cache(schema, table, tc.split_fractions, seed, fit, &warnings);
  for (const auto& c : warnings.constant_columns) spdlog::warn("column '{}' is constant in training data and is dropped", c);
  write_text(o.out, [&](std::ostream& os) { fgam::data::write_cache(os, cache); });
  spdlog::info("dataset cache {}: train {}, valid {}, test {}", o.out, cache.train.rows(), cache.valid.rows(),
               cache.test.rows());
  return 0;
}

int cmd_train(const json& cfg, const Options& o) {
  require_file(o.data, "dataset cache");
  if (o.out.empty()) throw fgam::InvalidArgument("train needs --out FILE for the model");
  const auto cache = fgam::data::load_cache(o.data);
  auto tc = fgam::io::train_config_from_json(cfg["training"]);
  if (o.seed) tc.seed = *o.seed;
  const auto mc = fgam::data::apply_layout(fgam::io::model_config_from_json(cfg["model"]), cache.stats);
  spdlog::info("training on {} rows ({} static numeric, {} categorical, {} time-varying)", cache.train.rows(),
               mc.static_numeric, mc.static_cardinalities.size(), mc.d_tv);
  const auto res = fgam::train(cache.train, cache.valid, mc, tc, [](const fgam::EpochRecord& r) {
    spdlog::debug("epoch {:3d} train {:.5f} valid {:.5f} auroc {:.4f}", r.epoch, r.train_loss, r.valid_loss,
                  r.valid_auroc);
  });
  const fgam::io::ModelFile m{res.params, cache.schema, cache.stats, tc, res.history.best_epoch};
  fgam::io::save_model(o.out, m);
  fs::path hist(o.out);
  hist.replace_extension(".history.csv");
  write_text(hist, [&](std::ostream& os) { fgam::write_history_csv(os, res.history); });
  const auto& best = res.history.epochs.at(res.history.best_epoch - 1);
  spdlog::info("best epoch {} of {} (valid loss {:.5f}, auroc {:.4f})", res.history.best_epoch,
               res.history.stopped_epoch, best.valid_loss, best.valid_auroc);
  spdlog::info("wrote {} (version {}) and {}", o.out, fgam::io::model_version(m), hist.string());
  return 0;
}

void check_same_schema(const fgam::io::ModelFile& m, const fgam::data::DatasetCache& c) {
  if (!(m.schema == c.schema) || !(m.stats == c.stats)) {
    throw fgam::InvalidArgument("dataset cache does not match the model's schema and standardization");
  }
}

int cmd_evaluate(const Options& o) {
  require_file(o.model, "model file");
  require_file(o.data, "dataset cache");
  const auto lm = fgam::io::load_model(o.model);
  const auto cache = fgam::data::load_cache(o.data);
  check_same_schema(lm.model, cache);
  const fgam::TabularDataset* d = o.split == "test"    ? &cache.test
                                  : o.split == "valid" ? &cache.valid
                                  : o.split == "train" ? &cache.train
                                                       : nullptr;
  if (!d) throw fgam::InvalidArgument("unknown split '" + o.split + "' (expected train, valid or test)");
  const auto rep = fgam::evaluate(lm.model.params, *d);
  std::cout << "split    " << o.split << " (" << rep.n_pos << " positive, " << rep.n_neg << " negative)\n";
  std::cout << fmt::format("AUROC    {:.4f}  95% CI [{:.4f}, {:.4f}]\n", rep.auroc, rep.auroc_ci.lo,
                           rep.auroc_ci.hi);
  std::cout << fmt::format("AUPRC    {:.4f}  95% CI [{:.4f}, {:.4f}]\n", rep.auprc, rep.auprc_ci.lo,
                           rep.auprc_ci.hi);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_text(dir / "roc.csv", [&](std::ostream& os) { fgam::write_roc_csv(os, rep.roc_points); });
    write_text(dir / "pr.csv", [&](std::ostream& os) { fgam::write_pr_csv(os, rep.pr_points); });
    write_text(dir / "report.json", [&](std::ostream& os) {
      os << json{{"split", o.split},
                 {"model_version", lm.version},
                 {"n_pos", rep.n_pos},
                 {"n_neg", rep.n_neg},
                 {"auroc", rep.auroc},
                 {"auroc_ci", {rep.auroc_ci.lo, rep.auroc_ci.hi}},
                 {"auprc", rep.auprc},
                 {"auprc_ci", {rep.auprc_ci.lo, rep.auprc_ci.hi}}}
                .dump(2)
         << '\n';
    });
    spdlog::info("wrote report and curves to {}", dir.string());
  }
  return 0;
}

std::string safe_name(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') c = '_';
  }
  return s;
}

int cmd_explain(const json& cfg, const Options& o) {
  require_file(o.model, "model file");
  require_file(o.data, "data table");
  if (o.case_id.empty()) throw fgam::InvalidArgument("explain needs --case ID");
  if (o.out.empty()) throw fgam::InvalidArgument("explain needs --out DIR");
  const auto lm = fgam::io::load_model(o.model);
  const auto& m = lm.model;
  const auto table = fgam::data::load_delimited(o.data, m.schema);
  std::optional<std::size_t> row;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table.ids[r] == o.case_id) row = r;
  }
  if (!row) throw fgam::InvalidArgument("case '" + o.case_id + "' is not in " + o.data);
  const auto ex = fgam::data::encode_row(m.schema, m.stats, table.rows[*row]);
  const auto rep = fgam::contributions(m.params, ex);
  const auto names = m.stats.tv_columns();
  const auto points = cfg["explain"]["points"].get<std::size_t>();
  if (points < 2) throw fgam::InvalidArgument("explain.points must be at least 2");
  const fs::path dir(o.out);
  json summary{{"case", o.case_id},
               {"model_version", lm.version},
               {"probability", rep.probability},
               {"logit", rep.logit},
               {"bias", rep.bias},
               {"display_bias", rep.display_bias},
               {"contributions", json::object()},
               {"display_contributions", json::object()}};
  for (std::size_t t = 0; t < names.size(); ++t) {
    const auto* ns = m.stats.find_numeric(names[t]);
    std::vector<double> raw(points), grid(points);
    for (std::size_t i = 0; i < points; ++i) {
      raw[i] = ns->p1 + (ns->p99 - ns->p1) * static_cast<double>(i) / static_cast<double>(points - 1);
      grid[i] = fgam::data::standardize(*ns, raw[i]);
    }
    const auto curve = fgam::contribution_curve(m.params, ex, t, grid);
    write_text(dir / ("curve_" + safe_name(names[t]) + ".csv"), [&](std::ostream& os) {
      os << "value,contribution\n";
      for (std::size_t i = 0; i < points; ++i) {
        os << fgam::data::format_double(raw[i]) << ',' << fgam::data::format_double(curve[i].contribution) << '\n';
      }
    });
    summary["contributions"][names[t]] = rep.contributions[t];
    summary["display_contributions"][names[t]] = rep.display_contributions[t];
  }
  write_text(dir / "contributions.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  std::cout << fmt::format("case {}  risk {:.4f}\n", o.case_id, rep.probability);
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rep.display_contributions[a] > rep.display_contributions[b]; });
  for (std::size_t t : order) std::cout << fmt::format("  {:<28} {:+.4f}\n", names[t], rep.display_contributions[t]);
  return 0;
}

std::atomic<bool> g_stop{false};
std::atomic<bool> g_reload{false};

int cmd_serve(const json& cfg, const Options& o) {
  require_file(o.model, "model file");
  fgam::service::ModelService svc(fgam::io::load_model(o.model));
  const auto host = cfg["serve"]["host"].get<std::string>();
  const int port = o.port.value_or(cfg["serve"]["port"].get<int>());
  httplib::Server srv;
  fgam::service::bind_routes(srv, svc, cfg["serve"]["static_dir"].get<std::string>());
  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
  if (!srv.bind_to_port(host, port)) throw fgam::Error("cannot bind " + host + ":" + std::to_string(port));
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  std::signal(SIGHUP, [](int) { g_reload = true; });
  std::thread watcher([&] {
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      if (g_reload.exchange(false)) {
        try {
          svc.reload(fgam::io::load_model(o.model));
          spdlog::info("reloaded {} (version {})", o.model, svc.snapshot()->version());
        } catch (const std::exception& e) {
          spdlog::error("reload failed, keeping version {}: {}", svc.snapshot()->version(), e.what());
        }
      }
    }
    srv.stop();
  });
  spdlog::info("serving model {} on http://{}:{}", svc.snapshot()->version(), host, port);
  srv.listen_after_bind();
  g_stop = true;
  watcher.join();
  spdlog::info("served {} requests", svc.requests());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Factored GAM risk models"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Run configuration (JSON)")->check(CLI::ExistingFile);

  auto* print = app.add_subcommand("print-config", "Print the effective run configuration");
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset with known ground truth");
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--seed", o.seed, "Generator seed");
  gen->add_option("--rows", o.rows, "Number of cases");

  auto* ing = app.add_subcommand("ingest", "Label, summarize, split and standardize into a dataset cache");
  ing->add_option("--data", o.data, "Summarized table (CSV); raw cases come from the config");
  ing->add_option("--out", o.out, "Dataset cache to write")->required();
  ing->add_option("--seed", o.seed, "Split seed");

  auto* tr = app.add_subcommand("train", "Train a model on a dataset cache");
  tr->add_option("--data", o.data, "Dataset cache")->required();
  tr->add_option("--out", o.out, "Model file to write")->required();
  tr->add_option("--seed", o.seed, "Training seed");

  auto* ev = app.add_subcommand("evaluate", "Report AUROC and AUPRC with confidence intervals");
  ev->add_option("--model", o.model, "Model file")->required();
  ev->add_option("--data", o.data, "Dataset cache")->required();
  ev->add_option("--split", o.split, "train, valid or test");
  ev->add_option("--out", o.out, "Directory for report.json, roc.csv and pr.csv");

  auto* exp = app.add_subcommand("explain", "Write per-feature contribution curves for one case");
  exp->add_option("--model", o.model, "Model file")->required();
  exp->add_option("--data", o.data, "Summarized table (CSV) containing the case")->required();
  exp->add_option("--case", o.case_id, "Case id")->required();
  exp->add_option("--out", o.out, "Output directory")->required();

  auto* srv = app.add_subcommand("serve", "Serve predictions over HTTP");
  srv->add_option("--model", o.model, "Model file")->required();
  srv->add_option("--port", o.port, "Port");

  CLI11_PARSE(app, argc, argv);
  try {
    const auto cfg = load_run_config(o.config);
    if (*print) return cmd_print_config(cfg);
    if (*gen) return cmd_generate(cfg, o);
    if (*ing) return cmd_ingest(cfg, o);
    if (*tr) return cmd_train(cfg, o);
    if (*ev) return cmd_evaluate(o);
    if (*exp) return cmd_explain(cfg, o);
    if (*srv) return cmd_serve(cfg, o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
