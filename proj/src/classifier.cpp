#include "updown/classifier.hpp"

#include <array>

#include "updown/error.hpp"

namespace updown {

namespace {

constexpr std::array<std::pair<ModelMode, std::string_view>, 6> kModeNames{{
    {ModelMode::SurfaceOnly, "surface"},
    {ModelMode::Additive, "additive"},
    {ModelMode::Upward, "upward"},
    {ModelMode::UpwardFeatures, "upward+features"},
    {ModelMode::UpwardDownward, "upward+downward"},
    {ModelMode::Full, "full"},
}};

constexpr std::array<ModelMode, 6> kModes{
    ModelMode::SurfaceOnly,    ModelMode::Additive,       ModelMode::Upward,
    ModelMode::UpwardFeatures, ModelMode::UpwardDownward, ModelMode::Full};

}  // namespace

std::string_view to_string(ModelMode mode) {
  for (const auto& [m, name] : kModeNames)
    if (m == mode) return name;
  return "unknown";
}

ModelMode parse_mode(std::string_view name) {
  for (const auto& [m, n] : kModeNames)
    if (n == name) return m;
  throw Error(ErrorCode::ModeParamMissing, "unknown mode '" + std::string(name) + "'");
}

std::span<const ModelMode> all_modes() { return kModes; }

Matrix materialize(const LowRankBilinear& form) {
  Matrix m = form.a1 * form.a2.transpose();
  m.diagonal() += form.a3;
  return m;
}

LowRankBilinear ClassifierParams::root_form(std::size_t y) const {
  const auto r = static_cast<Eigen::Index>(y);
  return {root1.row(r).transpose(), root2.row(r).transpose(), root3.row(r).transpose()};
}

LowRankBilinear ClassifierParams::entity_form(std::size_t y) const {
  const auto r = static_cast<Eigen::Index>(y);
  return {entity1.row(r).transpose(), entity2.row(r).transpose(),
          entity3.row(r).transpose()};
}

ClassifierParams ClassifierParams::zeros(std::size_t labels, std::size_t k,
                                         std::size_t f) {
  const auto y = static_cast<Eigen::Index>(labels);
  const auto kk = static_cast<Eigen::Index>(k);
  ClassifierParams p;
  for (RowMatrix* m : {&p.root1, &p.root2, &p.root3, &p.entity1, &p.entity2, &p.entity3})
    *m = RowMatrix::Zero(y, kk);
  p.features = RowMatrix::Zero(y, static_cast<Eigen::Index>(f));
  p.bias = Vector::Zero(y);
  return p;
}

Vector score(const Vector& root_m, const Vector& root_n,
             std::span<const VectorPair> down_pairs, const Vector& features,
             const ClassifierParams& params, ModelMode mode) {
  const auto labels = static_cast<Eigen::Index>(params.labels());
  if (labels == 0) throw Error(ErrorCode::ModeParamMissing, "classifier has no labels");
  Vector psi = params.bias;
  if (uses_root_term(mode)) {
    const Eigen::Index k = params.root1.cols();
    if (params.root1.rows() != labels || k == 0)
      throw Error(ErrorCode::ModeParamMissing, "root bilinear factors missing");
    if (root_m.size() != k || root_n.size() != k)
      throw Error(ErrorCode::DimensionMismatch, "root vector dimension differs from K");
    for (Eigen::Index y = 0; y < labels; ++y)
      psi(y) += params.root_form(static_cast<std::size_t>(y)).apply(root_m, root_n);
  }
  if (uses_downward(mode) && !down_pairs.empty()) {
    if (params.entity1.rows() != labels || params.entity1.cols() == 0)
      throw Error(ErrorCode::ModeParamMissing, "entity bilinear factors missing");
    for (Eigen::Index y = 0; y < labels; ++y) {
      const LowRankBilinear b = params.entity_form(static_cast<std::size_t>(y));
      for (const auto& [dm, dn] : down_pairs) {
        if (dm.size() != params.entity1.cols() || dn.size() != params.entity1.cols())
          throw Error(ErrorCode::DimensionMismatch, "downward vector dimension differs from K");
        psi(y) += b.apply(dm, dn);
      }
    }
  }
  if (uses_features(mode)) {
    if (params.features.rows() != labels)
      throw Error(ErrorCode::ModeParamMissing, "feature weights missing");
    if (features.size() != params.features.cols())
      throw Error(ErrorCode::DimensionMismatch,
                  "feature vector has " + std::to_string(features.size()) +
                      " entries, weights expect " +
                      std::to_string(params.features.cols()));
    psi += params.features * features;
  }
  return psi;
}

std::size_t predict(const Vector& scores) {
  std::size_t best = 0;
  for (Eigen::Index y = 1; y < scores.size(); ++y)
    if (scores(y) > scores(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(y);
  return best;
}

ParamCounts param_count(std::size_t labels, std::size_t k, std::size_t f) {
  return {2 * labels * 3 * k, 2 * labels * k * k, labels * f, labels};
}

}  // namespace updown
