#include "updown/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace updown {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

BinaryTree random_binary_tree(std::size_t leaves, const std::vector<std::string>& vocab,
                              Rng& rng) {
  if (leaves <= 1) return BinaryTree::leaf(vocab[rng.below(vocab.size())]);
  const std::size_t left = 1 + static_cast<std::size_t>(rng.below(leaves - 1));
  BinaryTree l = random_binary_tree(left, vocab, rng);
  BinaryTree r = random_binary_tree(leaves - left, vocab, rng);
  return BinaryTree::join(l, r, "X");
}

RandomProblem random_problem(ModelMode mode, std::size_t dim, std::size_t labels,
                             std::size_t features, Rng& rng) {
  RandomProblem p;
  std::vector<std::string> vocab;
  for (int i = 0; i < 10; ++i) vocab.push_back("w" + std::to_string(i));
  RowMatrix m(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  p.embeddings = WordEmbeddings(vocab, std::move(m));

  Instance& inst = p.instance;
  inst.id = "random";
  inst.arg_m = random_binary_tree(2 + rng.below(5), vocab, rng);
  inst.arg_n = random_binary_tree(2 + rng.below(5), vocab, rng);
  const std::size_t pairs = 1 + rng.below(2);
  for (std::size_t a = 0; a < pairs; ++a)
    inst.alignment.emplace_back(static_cast<NodeId>(rng.below(inst.arg_m.size())),
                                static_cast<NodeId>(rng.below(inst.arg_n.size())));
  inst.features = Vector::Zero(static_cast<Eigen::Index>(features));
  for (Eigen::Index f = 0; f < inst.features.size(); ++f)
    inst.features(f) = rng.below(2) ? 1.0 : 0.0;

  p.model.mode = mode;
  for (std::size_t y = 0; y < labels; ++y) p.model.labels.push_back("L" + std::to_string(y));
  std::vector<FeatureMap::Entry> entries;
  for (std::size_t f = 0; f < features; ++f) entries.push_back({"lex:f" + std::to_string(f), 0.0, {}});
  p.model.features = FeatureMap(std::move(entries));
  p.model.params = init_params(dim, labels, features, rng.next());
  // Random classifier weights.
  for (ParamTensor t : all_tensors())
    if (group_of(t) == ParamGroup::Classification || group_of(t) == ParamGroup::Features)
      for (double& v : p.model.params.tensor(t)) v = 0.7 * rng.normal();
  p.gold = static_cast<std::size_t>(rng.below(labels));
  p.lambda = {0.01, 0.02, 0.005, 0.03};
  return p;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  GradcheckReport report;
  Rng rng(options.seed);
  for (ModelMode mode : options.modes) {
    for (std::size_t k : options.dims) {
      GradcheckRow row;
      row.mode = mode;
      row.dim = k;
      while (row.instances < options.trials) {
        RandomProblem prob = random_problem(mode, k, options.labels, options.features, rng);
        const Vector s = decision_scores(prob.model, prob.embeddings, prob.instance);
        if (kink_distance(s, prob.gold) < options.min_kink_distance) {
          ++row.resampled;
          continue;
        }
        const Gradients analytic =
            backward(prob.model, prob.embeddings, prob.instance, prob.gold, prob.lambda);
        const FiniteDiffResult numeric = finite_diff_grad(
            prob.model, prob.embeddings, prob.instance, prob.gold, prob.lambda, options.h);
        for (ParamTensor t : all_tensors()) {
          if (!analytic.has(t)) continue;
          const auto a = analytic.tensor(t);
          const auto n = numeric.grads.tensor(t);
          for (std::size_t i = 0; i < a.size(); ++i) {
            const double e = relative_error(a[i], n[i], options.magnitude_floor);
            if (e > row.max_rel_err) {
              row.max_rel_err = e;
              row.worst_tensor = std::string(to_string(t));
            }
            ++row.coordinates;
          }
        }
        ++row.instances;
      }
      report.max_rel_err = std::max(report.max_rel_err, row.max_rel_err);
      if (!(row.max_rel_err < options.tolerance)) report.passed = false;
      report.rows.push_back(row);
    }
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string GradcheckReport::to_text() const {
  std::ostringstream out;
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s K=%-3zu instances=%zu coords=%zu resampled=%zu max_rel_err=%.3e%s%s\n",
                  std::string(to_string(r.mode)).c_str(), r.dim, r.instances, r.coordinates,
                  r.resampled, r.max_rel_err, r.worst_tensor.empty() ? "" : " worst=",
                  r.worst_tensor.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "max_rel_err\t%.6e\nstatus\t%s\nseconds\t%.2f\n", max_rel_err,
                passed ? "pass" : "fail", seconds);
  out << buf;
  return out.str();
}

}  // namespace updown
