#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "updown/instance.hpp"
#include "updown/model.hpp"
#include "updown/rng.hpp"

namespace updown {

using GroupValues = std::array<double, kGroupCount>;  // indexed by ParamGroup

inline double& at(GroupValues& v, ParamGroup g) { return v[static_cast<std::size_t>(g)]; }
inline double at(const GroupValues& v, ParamGroup g) { return v[static_cast<std::size_t>(g)]; }

struct TrainConfig {
  std::size_t dim = 20;
  GroupValues lambda{0.002, 0.002, 0.002, 0.002};  // per-group regularizer
  GroupValues eta{0.05, 0.05, 0.05, 0.05};         // per-group initial step
  double clip = 5.0;                               // per-group norm threshold
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  ModelMode mode = ModelMode::Full;
  double adagrad_eps = 1e-8;
  double dev_fraction = 0.2;
  // Epochs of surface-feature-only training before joint training.
  std::size_t pretrain_epochs = 0;
  // Stop once training accuracy reaches this value; 0 disables.
  double target_accuracy = 0.0;
  std::vector<CategoryBudget> budgets = default_budgets();

  void set_lambda(double v) { lambda.fill(v); }
  void set_eta(double v) { eta.fill(v); }
};

nlohmann::json to_json(const TrainConfig& config);
// Missing keys keep their defaults; "lambda"/"eta" accept a number (all
// groups) or an object keyed by group name.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {});

// Per-instance forward computation retained for the backward pass.
struct ForwardCache {
  NodeStates m;
  NodeStates n;
  Vector root_m;
  Vector root_n;
  std::vector<VectorPair> pairs;
  Vector features;  // empty unless the mode uses surface features
  Vector scores;
};

ForwardCache forward(const Model& model, const WordEmbeddings& emb,
                     const Instance& instance);

// Scores for every label (forward pass without keeping the cache).
Vector decision_scores(const Model& model, const WordEmbeddings& emb,
                       const Instance& instance);

// sum_{y != gold} max(0, 1 - psi(gold) + psi(y)).
double hinge_loss(const Vector& scores, std::size_t gold);

// Smallest |1 - psi(gold) + psi(y)| over y != gold.
double kink_distance(const Vector& scores, std::size_t gold);

// sum over active groups of (lambda_g / 2) ||theta_g||^2.
double regularizer(const ModelParams& params, ModelMode mode, const GroupValues& lambda);

// Hinge loss plus regularizer for one (instance, gold label) example.
double instance_loss(const Model& model, const WordEmbeddings& emb,
                     const Instance& instance, std::size_t gold,
                     const GroupValues& lambda);

struct Gradients {
  ModelParams values;
  TensorMask active;

  bool has(ParamTensor t) const { return active.test(static_cast<std::size_t>(t)); }
  std::span<double> tensor(ParamTensor t) { return values.tensor(t); }
  std::span<const double> tensor(ParamTensor t) const { return values.tensor(t); }
  double group_norm(ParamGroup g) const;
};

// Exact (sub)gradient of instance_loss by reverse accumulation over the
// recorded up-down graph. Tensors outside the mode are inactive and zero.
// Throws Error{StateMissing} when `cache` lacks the states the mode needs.
Gradients backward(const Model& model, const Instance& instance,
                   std::size_t gold, const GroupValues& lambda,
                   const ForwardCache& cache);
Gradients backward(const Model& model, const WordEmbeddings& emb,
                   const Instance& instance, std::size_t gold,
                   const GroupValues& lambda);

struct FiniteDiffResult {
  Gradients grads;
  double kink_distance = 0.0;
  bool near_kink = false;  // kink_distance <= 1e-3
};

// Central differences (L(theta + h e) - L(theta - h e)) / 2h over every
// active coordinate. Proximity to a hinge kink is reported, not thrown.
FiniteDiffResult finite_diff_grad(const Model& model, const WordEmbeddings& emb,
                                  const Instance& instance, std::size_t gold,
                                  const GroupValues& lambda, double h);

// Rescales each group whose L2 norm exceeds tau to norm tau.
// Throws Error{NonFiniteGradient}.
void clip(Gradients& grads, double tau);

struct OptimizerState {
  std::array<std::vector<double>, kTensorCount> accum;
  std::size_t steps = 0;

  static OptimizerState for_params(const ModelParams& params);
};

// accum += g^2; theta -= eta_g g / sqrt(accum + eps), active tensors only.
// Throws Error{ShapeMismatch}.
void adagrad_step(ModelParams& params, const Gradients& grads,
                  OptimizerState& state, const TrainConfig& config);

// Classification parameters zero; U and D i.i.d. uniform in
// [-sqrt(6 / 2K), +sqrt(6 / 2K)].
ModelParams init_params(std::size_t k, std::size_t labels, std::size_t f,
                        std::uint64_t seed);
double init_bound(std::size_t k);

struct EpochLog {
  std::size_t epoch = 0;
  double mean_objective = 0.0;
  double train_accuracy = 0.0;
};

// Fraction of instances whose predicted label is among their gold labels.
double training_accuracy(const Model& model, const WordEmbeddings& emb,
                         const Dataset& data);

// Sequential SGD over the training view with a seeded shuffle per epoch.
class Trainer {
 public:
  // `features` is required when the mode uses surface features.
  // Throws Error{EmptyDataset | ModeFeatureMapMissing}.
  Trainer(const Dataset& data, const WordEmbeddings& emb, TrainConfig config,
          const FeatureMap* features = nullptr);

  // One backward / clip / AdaGrad step; returns the example's objective.
  double step(const LabeledRef& example);
  EpochLog run_epoch();
  // Surface-only epochs that touch only beta and b.
  void pretrain_features(std::size_t epochs);

  const Model& model() const { return model_; }
  const Dataset& data() const { return data_; }
  const std::vector<LabeledRef>& view() const { return view_; }
  const OptimizerState& optimizer() const { return opt_; }
  std::size_t epochs_done() const { return epoch_; }

 private:
  Dataset data_;
  const WordEmbeddings& emb_;
  TrainConfig config_;
  Model model_;
  OptimizerState opt_;
  std::vector<LabeledRef> view_;
  Rng rng_;
  std::size_t epoch_ = 0;

  double step_with(const LabeledRef& example, const Model& as_mode);
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

TrainResult train(const Dataset& data, const WordEmbeddings& emb,
                  const TrainConfig& config, const FeatureMap* features = nullptr);

// "epoch<TAB>mean_objective<TAB>train_acc" per line.
std::string format_log(const std::vector<EpochLog>& log);

// Duplicates the minority class (positive = has `positive` among its labels)
// by seeded sampling with replacement until both classes are equal.
// Throws Error{OneClassEmpty}.
Dataset resample_balanced(const Dataset& data, const std::string& positive,
                          std::uint64_t seed);

// Seeded split; dev holds round(fraction * N) instances.
std::pair<Dataset, Dataset> split_dev(const Dataset& data, double fraction,
                                      std::uint64_t seed);

enum class GridObjective { Accuracy, F1 };

struct GridSpec {
  std::vector<std::size_t> dims{20, 30, 40, 50, 60};
  std::vector<double> lambdas{0.0002, 0.002, 0.02, 0.2};
  std::vector<double> etas{0.01, 0.03, 0.05, 0.09};
};

struct GridRow {
  std::size_t dim = 0;
  double lambda = 0.0;
  double eta = 0.0;
  double score = 0.0;
};

struct GridResult {
  TrainConfig best;
  double best_score = 0.0;
  std::vector<GridRow> table;  // grid order: K outermost, then lambda, eta
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
};

struct GridOptions {
  GridObjective objective = GridObjective::Accuracy;
  std::string positive;    // required for F1
  bool resample = false;   // balance the training split for one-vs-all
};

// Embeddings of dimension K for each candidate K.
using EmbeddingProvider = std::function<const WordEmbeddings&(std::size_t)>;

// Exhaustive search over dims x lambdas x etas; lambda and eta are applied
// to all four groups. Ties keep the earlier grid point.
GridResult grid_search(const Dataset& data, const EmbeddingProvider& embeddings,
                       const TrainConfig& base, const GridSpec& grid,
                       const GridOptions& options);

std::string format_grid(const GridResult& result);

}  // namespace updown
