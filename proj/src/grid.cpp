#include <cstdio>
#include <optional>
#include <sstream>

#include "updown/error.hpp"
#include "updown/evaluation.hpp"
#include "updown/training.hpp"

namespace updown {

GridResult grid_search(const Dataset& data, const EmbeddingProvider& embeddings,
                       const TrainConfig& base, const GridSpec& grid,
                       const GridOptions& options) {
  if (options.objective == GridObjective::F1 && options.positive.empty())
    throw Error(ErrorCode::LabelMismatch, "F1 grid search needs a positive label");
  auto [train_set, dev_set] = split_dev(data, base.dev_fraction, base.seed);
  if (options.resample) train_set = resample_balanced(train_set, options.positive, base.seed);

  std::optional<FeatureMap> features;
  if (uses_features(base.mode)) features = select_features(train_set, base.budgets);

  GridResult result;
  result.train_size = train_set.instances.size();
  result.dev_size = dev_set.instances.size();
  bool first = true;
  for (std::size_t k : grid.dims) {
    const WordEmbeddings& emb = embeddings(k);
    for (double lambda : grid.lambdas) {
      for (double eta : grid.etas) {
        TrainConfig cfg = base;
        cfg.dim = k;
        cfg.set_lambda(lambda);
        cfg.set_eta(eta);
        const TrainResult trained =
            train(train_set, emb, cfg, features ? &*features : nullptr);
        const auto predicted = predict_labels(trained.model, emb, dev_set);
        const double s = options.objective == GridObjective::F1
                             ? binary_report(predicted, dev_set, options.positive).f1
                             : multiclass_report(predicted, dev_set).accuracy;
        result.table.push_back({k, lambda, eta, s});
        if (first || s > result.best_score) {
          result.best = cfg;
          result.best_score = s;
          first = false;
        }
      }
    }
  }
  return result;
}

std::string format_grid(const GridResult& result) {
  std::ostringstream out;
  out << "K\tlambda\teta\tdev_score\n";
  char buf[128];
  for (const auto& row : result.table) {
    std::snprintf(buf, sizeof buf, "%zu\t%g\t%g\t%.6f\n", row.dim, row.lambda, row.eta,
                  row.score);
    out << buf;
  }
  return out.str();
}

}  // namespace updown
