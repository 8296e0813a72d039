#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "updown/training.hpp"

namespace updown {

// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double relative_error(double analytic, double numeric, double floor);

struct GradcheckOptions {
  std::vector<ModelMode> modes{all_modes().begin(), all_modes().end()};
  std::vector<std::size_t> dims{2, 5, 10};
  std::size_t trials = 25;
  std::uint64_t seed = 1;
  double h = 1e-6;
  double tolerance = 1e-4;
  double magnitude_floor = 1e-4;
  double min_kink_distance = 1e-3;
  std::size_t labels = 3;
  std::size_t features = 6;
};

struct GradcheckRow {
  ModelMode mode = ModelMode::Full;
  std::size_t dim = 0;
  std::size_t instances = 0;
  std::size_t coordinates = 0;
  std::size_t resampled = 0;  // draws rejected for kink proximity
  double max_rel_err = 0.0;
  std::string worst_tensor;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  double max_rel_err = 0.0;
  bool passed = true;
  double seconds = 0.0;

  std::string to_text() const;
};

// Random trees, embeddings, alignments, features and non-zero parameters;
// backward() is compared against finite_diff_grad() on every active
// coordinate.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

// Building blocks, exposed for tests.
struct RandomProblem {
  Model model;
  WordEmbeddings embeddings;
  Instance instance;
  std::size_t gold = 0;
  GroupValues lambda{};
};

RandomProblem random_problem(ModelMode mode, std::size_t dim, std::size_t labels,
                             std::size_t features, Rng& rng);
BinaryTree random_binary_tree(std::size_t leaves, const std::vector<std::string>& vocab,
                              Rng& rng);

}  // namespace updown
