// Library walkthrough: simulate a cohort, fit a model, score the test split
// and explain one patient.

#include <cstdio>

#include "fgam/data/ingest.hpp"
#include "fgam/data/synthetic.hpp"
#include "fgam/training.hpp"

using namespace fgam;

int main() {
  const auto syn = data::generate_synthetic(data::default_interaction_spec(), 5000, 7);
  const auto cache = data::build_cache(syn.schema, syn.table, {0.7, 0.1, 0.2}, 7);

  auto config = data::apply_layout(FGamConfig{}, cache.stats);
  config.trunk_widths = {32, 16};
  TrainConfig tc;
  tc.max_epochs = 30;
  tc.learning_rate = 3e-3;
  const auto fit = train(cache.train, cache.valid, config, tc);
  std::printf("best epoch %zu of %zu\n", fit.history.best_epoch, fit.history.stopped_epoch);

  const auto rep = evaluate(fit.params, cache.test);
  std::printf("test AUROC %.3f [%.3f, %.3f]  AUPRC %.3f [%.3f, %.3f]\n", rep.auroc, rep.auroc_ci.lo, rep.auroc_ci.hi,
              rep.auprc, rep.auprc_ci.lo, rep.auprc_ci.hi);

  // Raw values for one patient, in schema column order.
  const std::vector<data::Cell> patient{0.9, -0.4, std::string("cardiac"), 62.0, 0.31, 22.0, 7.5};
  const auto ex = data::encode_row(cache.schema, cache.stats, patient);
  const auto why = contributions(fit.params, ex);
  std::printf("risk %.3f\n", why.probability);
  const auto names = cache.stats.tv_columns();
  for (std::size_t t = 0; t < names.size(); ++t) std::printf("  %-16s %+.3f\n", names[t].c_str(), why.display_contributions[t]);

  // How the map_mean contribution moves between 50 and 100 mmHg.
  const auto* map = cache.stats.find_numeric("map_mean");
  std::vector<double> grid;
  for (double v = 50; v <= 100; v += 10) grid.push_back(data::standardize(*map, v));
  for (const auto& pt : contribution_curve(fit.params, ex, 0, grid)) {
    std::printf("  map %5.1f -> %+.3f\n", data::destandardize(*map, pt.value), pt.contribution);
  }
}
