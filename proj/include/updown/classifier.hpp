#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "updown/embeddings.hpp"

namespace updown {

// Ablation ladder, from the surface-feature baseline to the full model.
enum class ModelMode {
  SurfaceOnly,     // beta . f + b
  Additive,        // summed word vectors through the root bilinear form
  Upward,          // root upward vectors
  UpwardFeatures,  // + surface features
  UpwardDownward,  // + aligned downward vectors
  Full,            // upward + downward + features
};

std::string_view to_string(ModelMode mode);
ModelMode parse_mode(std::string_view name);  // throws Error{ModeParamMissing}
std::span<const ModelMode> all_modes();

constexpr bool uses_root_term(ModelMode m) { return m != ModelMode::SurfaceOnly; }
constexpr bool uses_composition(ModelMode m) {
  return m != ModelMode::SurfaceOnly && m != ModelMode::Additive;
}
constexpr bool uses_downward(ModelMode m) {
  return m == ModelMode::UpwardDownward || m == ModelMode::Full;
}
constexpr bool uses_features(ModelMode m) {
  return m == ModelMode::SurfaceOnly || m == ModelMode::UpwardFeatures ||
         m == ModelMode::Full;
}

// x^T (a1 a2^T + diag(a3)) z evaluated in O(K) without forming the matrix.
struct LowRankBilinear {
  Vector a1;
  Vector a2;
  Vector a3;

  double apply(const Vector& x, const Vector& z) const {
    return a1.dot(x) * a2.dot(z) + (a3.array() * x.array() * z.array()).sum();
  }
};

Matrix materialize(const LowRankBilinear& form);

// Per-label classification parameters, one row per label in label order.
// root* factor A_y (root term), entity* factor B_y (aligned-mention term).
struct ClassifierParams {
  RowMatrix root1, root2, root3;
  RowMatrix entity1, entity2, entity3;
  RowMatrix features;  // |Y| x F
  Vector bias;         // |Y|

  std::size_t labels() const { return static_cast<std::size_t>(bias.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(root1.cols()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }

  LowRankBilinear root_form(std::size_t y) const;
  LowRankBilinear entity_form(std::size_t y) const;

  static ClassifierParams zeros(std::size_t labels, std::size_t k, std::size_t f);
};

using VectorPair = std::pair<Vector, Vector>;

// psi(y) = u_m^T A_y u_n + sum_(i,j) d_i^T B_y d_j + beta_y . f + b_y, with
// the terms the mode does not use left out. An empty `down_pairs` leaves
// only the root term. Throws Error{DimensionMismatch | ModeParamMissing}.
Vector score(const Vector& root_m, const Vector& root_n,
             std::span<const VectorPair> down_pairs, const Vector& features,
             const ClassifierParams& params, ModelMode mode);

// Index of the largest score; ties go to the earliest label.
std::size_t predict(const Vector& scores);

struct ParamCounts {
  std::size_t bilinear = 0;   // 2 |Y| 3K
  std::size_t full_rank = 0;  // 2 |Y| K^2
  std::size_t features = 0;   // |Y| F
  std::size_t biases = 0;     // |Y|
};

ParamCounts param_count(std::size_t labels, std::size_t k, std::size_t f);

}  // namespace updown
