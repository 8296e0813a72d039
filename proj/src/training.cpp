#include "updown/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "updown/error.hpp"

namespace updown {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

json to_json(const TrainConfig& c) {
  json lambda, eta, budgets;
  for (ParamGroup g : kGroups) {
    lambda[std::string(to_string(g))] = at(c.lambda, g);
    eta[std::string(to_string(g))] = at(c.eta, g);
  }
  for (const auto& b : c.budgets) budgets[b.category] = b.budget;
  return {{"dim", c.dim},
          {"lambda", lambda},
          {"eta", eta},
          {"clip", c.clip},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"mode", std::string(to_string(c.mode))},
          {"adagrad_eps", c.adagrad_eps},
          {"dev_fraction", c.dev_fraction},
          {"pretrain_epochs", c.pretrain_epochs},
          {"target_accuracy", c.target_accuracy},
          {"budgets", budgets}};
}

namespace {

void read_groups(const json& j, GroupValues& out) {
  if (j.is_number()) {
    out.fill(j.get<double>());
    return;
  }
  for (ParamGroup g : kGroups) {
    const std::string name(to_string(g));
    if (j.contains(name)) at(out, g) = j.at(name).get<double>();
  }
}

}  // namespace

TrainConfig config_from_json(const json& j, TrainConfig c) {
  try {
    if (j.contains("dim")) c.dim = j["dim"].get<std::size_t>();
    if (j.contains("lambda")) read_groups(j["lambda"], c.lambda);
    if (j.contains("eta")) read_groups(j["eta"], c.eta);
    if (j.contains("clip")) c.clip = j["clip"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("adagrad_eps")) c.adagrad_eps = j["adagrad_eps"].get<double>();
    if (j.contains("dev_fraction")) c.dev_fraction = j["dev_fraction"].get<double>();
    if (j.contains("pretrain_epochs")) c.pretrain_epochs = j["pretrain_epochs"].get<std::size_t>();
    if (j.contains("target_accuracy")) c.target_accuracy = j["target_accuracy"].get<double>();
    if (j.contains("budgets")) {
      c.budgets.clear();
      for (const auto& [name, value] : j["budgets"].items())
        c.budgets.push_back({name, value.get<std::size_t>()});
      // Fixed category order regardless of JSON object ordering.
      std::stable_sort(c.budgets.begin(), c.budgets.end(),
                       [](const CategoryBudget& a, const CategoryBudget& b) {
                         auto rank = [](const std::string& s) {
                           return s == "lex" ? 0 : s == "prod" ? 1 : 2;
                         };
                         return rank(a.category) < rank(b.category);
                       });
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInstance, std::string("bad config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Forward

ForwardCache forward(const Model& model, const WordEmbeddings& emb,
                     const Instance& instance) {
  ForwardCache c;
  const ModelMode mode = model.mode;
  const auto& comp = model.params.composition;
  if (uses_composition(mode)) {
    c.m = upward_pass(instance.arg_m, emb, comp);
    c.n = upward_pass(instance.arg_n, emb, comp);
    c.root_m = c.m.up[static_cast<std::size_t>(instance.arg_m.root())];
    c.root_n = c.n.up[static_cast<std::size_t>(instance.arg_n.root())];
    if (uses_downward(mode) && !instance.alignment.empty()) {
      c.m = downward_pass(instance.arg_m, std::move(c.m), comp);
      c.n = downward_pass(instance.arg_n, std::move(c.n), comp);
      for (const auto& [i, j] : instance.alignment)
        c.pairs.emplace_back(c.m.down[static_cast<std::size_t>(i)],
                             c.n.down[static_cast<std::size_t>(j)]);
    }
  } else if (mode == ModelMode::Additive) {
    const auto tm = instance.arg_m.tokens();
    const auto tn = instance.arg_n.tokens();
    c.root_m = additive_representation(tm, emb);
    c.root_n = additive_representation(tn, emb);
  }
  if (uses_features(mode)) {
    c.features = instance.features.size() == static_cast<Eigen::Index>(model.features.size())
                     ? instance.features
                     : vectorize(instance, model.features);
  }
  c.scores = score(c.root_m, c.root_n, c.pairs, c.features, model.params.classifier, mode);
  return c;
}

Vector decision_scores(const Model& model, const WordEmbeddings& emb,
                       const Instance& instance) {
  return forward(model, emb, instance).scores;
}

double hinge_loss(const Vector& scores, std::size_t gold) {
  const auto g = static_cast<Eigen::Index>(gold);
  double loss = 0.0;
  for (Eigen::Index y = 0; y < scores.size(); ++y)
    if (y != g) loss += std::max(0.0, 1.0 - scores(g) + scores(y));
  return loss;
}

double kink_distance(const Vector& scores, std::size_t gold) {
  const auto g = static_cast<Eigen::Index>(gold);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index y = 0; y < scores.size(); ++y)
    if (y != g) best = std::min(best, std::abs(1.0 - scores(g) + scores(y)));
  return best;
}

double regularizer(const ModelParams& params, ModelMode mode, const GroupValues& lambda) {
  const TensorMask active = active_tensors(mode);
  double r = 0.0;
  for (ParamTensor t : all_tensors()) {
    if (!active.test(static_cast<std::size_t>(t))) continue;
    double sq = 0.0;
    for (double v : params.tensor(t)) sq += v * v;
    r += 0.5 * at(lambda, group_of(t)) * sq;
  }
  return r;
}

double instance_loss(const Model& model, const WordEmbeddings& emb,
                     const Instance& instance, std::size_t gold,
                     const GroupValues& lambda) {
  return hinge_loss(decision_scores(model, emb, instance), gold) +
         regularizer(model.params, model.mode, lambda);
}

// ---------------------------------------------------------------------------
// Backward

double Gradients::group_norm(ParamGroup g) const {
  double sq = 0.0;
  for (ParamTensor t : all_tensors()) {
    if (group_of(t) != g || !has(t)) continue;
    for (double v : values.tensor(t)) sq += v * v;
  }
  return std::sqrt(sq);
}

namespace {

Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

void accumulate(std::vector<Vector>& adj, NodeId id, const Vector& g) {
  auto& slot = adj[static_cast<std::size_t>(id)];
  if (slot.size() == 0)
    slot = g;
  else
    slot += g;
}

// Gradient of a factored bilinear form x^T (a1 a2^T + diag a3) z scaled by c,
// written into row `y` of the three factor matrices, plus the adjoints of x, z.
void bilinear_backward(double c, std::size_t y, const LowRankBilinear& form,
                       const Vector& x, const Vector& z, RowMatrix& g1,
                       RowMatrix& g2, RowMatrix& g3, Vector& gx, Vector& gz) {
  const auto r = static_cast<Eigen::Index>(y);
  const double ax = form.a1.dot(x);
  const double bz = form.a2.dot(z);
  g1.row(r) += (c * bz) * x.transpose();
  g2.row(r) += (c * ax) * z.transpose();
  g3.row(r) += c * x.cwiseProduct(z).transpose();
  gx += c * (bz * form.a1 + form.a3.cwiseProduct(z));
  gz += c * (ax * form.a2 + form.a3.cwiseProduct(x));
}

// Reverse sweep over the downward network: consumes d-adjoints, emits
// u-adjoints for siblings and the root, accumulates dL/dD.
void downward_backward(const BinaryTree& tree, const NodeStates& s, const Matrix& down,
                       std::vector<Vector>& gd, std::vector<Vector>& gu, Matrix& g_down) {
  const auto k = down.rows();
  const EvalSchedule sched = schedule(tree);
  for (auto it = sched.downward.rbegin(); it != sched.downward.rend(); ++it) {
    const NodeId id = *it;
    const Vector& g = gd[static_cast<std::size_t>(id)];
    if (g.size() == 0) continue;
    const NodeId parent = tree.parent(id);
    if (parent == kNoNode) {
      accumulate(gu, id, g);  // d_0 = u_0
      continue;
    }
    const NodeId sib = tree.sibling(id);
    const Vector& d = s.down[static_cast<std::size_t>(id)];
    const Vector delta = g.cwiseProduct((1.0 - d.array().square()).matrix());
    g_down += delta * stack(s.down[static_cast<std::size_t>(parent)],
                            s.up[static_cast<std::size_t>(sib)]).transpose();
    const Vector back = down.transpose() * delta;
    accumulate(gd, parent, back.head(k));
    accumulate(gu, sib, back.tail(k));
  }
}

void upward_backward(const BinaryTree& tree, const NodeStates& s, const Matrix& up,
                     std::vector<Vector>& gu, Matrix& g_up) {
  const auto k = up.rows();
  const EvalSchedule sched = schedule(tree);
  for (auto it = sched.upward.rbegin(); it != sched.upward.rend(); ++it) {
    const NodeId id = *it;
    if (tree.is_leaf(id)) continue;  // embeddings are fixed
    const Vector& g = gu[static_cast<std::size_t>(id)];
    if (g.size() == 0) continue;
    const Vector& u = s.up[static_cast<std::size_t>(id)];
    const Vector delta = g.cwiseProduct((1.0 - u.array().square()).matrix());
    const NodeId l = tree.left(id), r = tree.right(id);
    g_up += delta * stack(s.up[static_cast<std::size_t>(l)],
                          s.up[static_cast<std::size_t>(r)]).transpose();
    const Vector back = up.transpose() * delta;
    accumulate(gu, l, back.head(k));
    accumulate(gu, r, back.tail(k));
  }
}

}  // namespace

Gradients backward(const Model& model, const Instance& instance,
                   std::size_t gold, const GroupValues& lambda,
                   const ForwardCache& cache) {
  const ModelMode mode = model.mode;
  const ModelParams& p = model.params;
  const ClassifierParams& cls = p.classifier;
  const bool entity_term = uses_downward(mode) && !instance.alignment.empty();
  if (cache.scores.size() != static_cast<Eigen::Index>(cls.labels()) ||
      (uses_root_term(mode) && (cache.root_m.size() == 0 || cache.root_n.size() == 0)) ||
      (uses_composition(mode) && (!cache.m.has_upward() || !cache.n.has_upward())) ||
      (entity_term && (!cache.m.has_downward() || !cache.n.has_downward() ||
                       cache.pairs.size() != instance.alignment.size())))
    throw Error(ErrorCode::StateMissing, "forward cache incomplete for mode " +
                                             std::string(to_string(mode)));

  Gradients G{ModelParams::zeros_like(p), active_tensors(mode)};
  ClassifierParams& gc = G.values.classifier;

  // dL/dpsi(y) of the summed hinge terms; subgradient 0 at the kink.
  const auto g = static_cast<Eigen::Index>(gold);
  Vector coef = Vector::Zero(cache.scores.size());
  for (Eigen::Index y = 0; y < coef.size(); ++y) {
    if (y == g) continue;
    if (1.0 - cache.scores(g) + cache.scores(y) > 0.0) {
      coef(y) += 1.0;
      coef(g) -= 1.0;
    }
  }

  gc.bias = coef;
  if (uses_features(mode)) gc.features = coef * cache.features.transpose();

  const auto k = static_cast<Eigen::Index>(p.dim());
  Vector g_root_m, g_root_n;
  if (uses_root_term(mode)) {
    g_root_m = Vector::Zero(cache.root_m.size());
    g_root_n = Vector::Zero(cache.root_n.size());
    for (Eigen::Index y = 0; y < coef.size(); ++y)
      if (coef(y) != 0.0)
        bilinear_backward(coef(y), static_cast<std::size_t>(y),
                          cls.root_form(static_cast<std::size_t>(y)), cache.root_m,
                          cache.root_n, gc.root1, gc.root2, gc.root3, g_root_m, g_root_n);
  }

  if (uses_composition(mode)) {
    std::vector<Vector> gu_m(instance.arg_m.size()), gu_n(instance.arg_n.size());
    accumulate(gu_m, instance.arg_m.root(), g_root_m);
    accumulate(gu_n, instance.arg_n.root(), g_root_n);
    if (entity_term) {
      std::vector<Vector> gd_m(instance.arg_m.size()), gd_n(instance.arg_n.size());
      for (std::size_t a = 0; a < instance.alignment.size(); ++a) {
        const auto& [dm, dn] = cache.pairs[a];
        Vector gx = Vector::Zero(k), gz = Vector::Zero(k);
        for (Eigen::Index y = 0; y < coef.size(); ++y)
          if (coef(y) != 0.0)
            bilinear_backward(coef(y), static_cast<std::size_t>(y),
                              cls.entity_form(static_cast<std::size_t>(y)), dm, dn,
                              gc.entity1, gc.entity2, gc.entity3, gx, gz);
        accumulate(gd_m, instance.alignment[a].first, gx);
        accumulate(gd_n, instance.alignment[a].second, gz);
      }
      downward_backward(instance.arg_m, cache.m, p.composition.down, gd_m, gu_m,
                        G.values.composition.down);
      downward_backward(instance.arg_n, cache.n, p.composition.down, gd_n, gu_n,
                        G.values.composition.down);
    }
    upward_backward(instance.arg_m, cache.m, p.composition.up, gu_m, G.values.composition.up);
    upward_backward(instance.arg_n, cache.n, p.composition.up, gu_n, G.values.composition.up);
  }

  // (lambda/2)||theta||^2 contributes lambda * theta.
  for (ParamTensor t : all_tensors()) {
    if (!G.has(t)) continue;
    const double l = at(lambda, group_of(t));
    if (l == 0.0) continue;
    auto gt = G.tensor(t);
    const auto pt = p.tensor(t);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += l * pt[i];
  }
  return G;
}

Gradients backward(const Model& model, const WordEmbeddings& emb,
                   const Instance& instance, std::size_t gold,
                   const GroupValues& lambda) {
  return backward(model, instance, gold, lambda, forward(model, emb, instance));
}

FiniteDiffResult finite_diff_grad(const Model& model, const WordEmbeddings& emb,
                                  const Instance& instance, std::size_t gold,
                                  const GroupValues& lambda, double h) {
  FiniteDiffResult r{{ModelParams::zeros_like(model.params), active_tensors(model.mode)}};
  r.kink_distance = kink_distance(decision_scores(model, emb, instance), gold);
  r.near_kink = r.kink_distance <= 1e-3;
  Model probe = model;
  for (ParamTensor t : all_tensors()) {
    if (!r.grads.has(t)) continue;
    auto theta = probe.params.tensor(t);
    auto out = r.grads.tensor(t);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + h;
      const double plus = instance_loss(probe, emb, instance, gold, lambda);
      theta[i] = saved - h;
      const double minus = instance_loss(probe, emb, instance, gold, lambda);
      theta[i] = saved;
      out[i] = (plus - minus) / (2.0 * h);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Optimization

void clip(Gradients& grads, double tau) {
  for (ParamTensor t : all_tensors())
    if (grads.has(t))
      for (double v : grads.tensor(t))
        if (!std::isfinite(v))
          throw Error(ErrorCode::NonFiniteGradient,
                      "non-finite gradient in " + std::string(to_string(t)));
  for (ParamGroup g : kGroups) {
    const double norm = grads.group_norm(g);
    if (!(norm > tau)) continue;
    const double scale = tau / norm;
    for (ParamTensor t : all_tensors())
      if (group_of(t) == g && grads.has(t))
        for (double& v : grads.tensor(t)) v *= scale;
  }
}

OptimizerState OptimizerState::for_params(const ModelParams& params) {
  OptimizerState s;
  for (ParamTensor t : all_tensors())
    s.accum[static_cast<std::size_t>(t)].assign(params.tensor(t).size(), 0.0);
  return s;
}

void adagrad_step(ModelParams& params, const Gradients& grads,
                  OptimizerState& state, const TrainConfig& config) {
  if (!params.same_shape(grads.values))
    throw Error(ErrorCode::ShapeMismatch, "gradient shape differs from parameters");
  for (ParamTensor t : all_tensors()) {
    if (!grads.has(t)) continue;
    auto theta = params.tensor(t);
    const auto g = grads.tensor(t);
    auto& acc = state.accum[static_cast<std::size_t>(t)];
    if (acc.size() != theta.size())
      throw Error(ErrorCode::ShapeMismatch, "optimizer state shape differs from parameters");
    const double eta = at(config.eta, group_of(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      acc[i] += g[i] * g[i];
      theta[i] -= eta * g[i] / std::sqrt(acc[i] + config.adagrad_eps);
    }
  }
  ++state.steps;
}

double init_bound(std::size_t k) {
  return std::sqrt(6.0 / (2.0 * static_cast<double>(k)));
}

ModelParams init_params(std::size_t k, std::size_t labels, std::size_t f,
                        std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(k, labels, f);
  Rng rng(seed);
  const double b = init_bound(k);
  for (ParamTensor t : {ParamTensor::Up, ParamTensor::Down})
    for (double& v : p.tensor(t)) v = rng.uniform(-b, b);
  return p;
}

// ---------------------------------------------------------------------------
// Training loop

double training_accuracy(const Model& model, const WordEmbeddings& emb,
                         const Dataset& data) {
  if (data.instances.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& inst : data.instances) {
    const std::size_t y = predict(decision_scores(model, emb, inst));
    if (std::find(inst.labels.begin(), inst.labels.end(), model.labels[y]) != inst.labels.end())
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.instances.size());
}

Trainer::Trainer(const Dataset& data, const WordEmbeddings& emb, TrainConfig config,
                 const FeatureMap* features)
    : data_(data), emb_(emb), config_(std::move(config)), rng_(config_.seed ^ 0x9e3779b97f4a7c15ULL) {
  if (data_.instances.empty()) throw Error(ErrorCode::EmptyDataset, "no training instances");
  if (uses_features(config_.mode) && features == nullptr)
    throw Error(ErrorCode::ModeFeatureMapMissing,
                "mode " + std::string(to_string(config_.mode)) + " needs a feature map");
  if (emb_.dim() != config_.dim && config_.mode != ModelMode::SurfaceOnly)
    throw Error(ErrorCode::DimensionMismatch,
                "embeddings have dimension " + std::to_string(emb_.dim()) +
                    ", config asks for K = " + std::to_string(config_.dim));
  model_.mode = config_.mode;
  model_.labels = data_.labels;
  if (features != nullptr && uses_features(config_.mode)) {
    model_.features = *features;
    data_ = attach_features(std::move(data_), *features);
  }
  model_.params = init_params(config_.dim, model_.labels.size(), model_.features.size(),
                              config_.seed);
  opt_ = OptimizerState::for_params(model_.params);
  view_ = training_view(data_);
}

double Trainer::step(const LabeledRef& example) {
  const Instance& inst = data_.instances[example.instance];
  const ForwardCache cache = forward(model_, emb_, inst);
  const double loss = hinge_loss(cache.scores, example.label) +
                      regularizer(model_.params, model_.mode, config_.lambda);
  Gradients g = backward(model_, inst, example.label, config_.lambda, cache);
  clip(g, config_.clip);
  adagrad_step(model_.params, g, opt_, config_);
  return loss;
}

void Trainer::pretrain_features(std::size_t epochs) {
  if (!uses_features(model_.mode)) return;
  const ModelMode joint = model_.mode;
  model_.mode = ModelMode::SurfaceOnly;
  for (std::size_t e = 0; e < epochs; ++e) {
    auto order = view_;
    rng_.shuffle(order);
    for (const auto& ex : order) step(ex);
  }
  model_.mode = joint;
}

EpochLog Trainer::run_epoch() {
  auto order = view_;
  rng_.shuffle(order);
  double total = 0.0;
  for (const auto& ex : order) total += step(ex);
  ++epoch_;
  return {epoch_, total / static_cast<double>(order.size()),
          training_accuracy(model_, emb_, data_)};
}

TrainResult train(const Dataset& data, const WordEmbeddings& emb,
                  const TrainConfig& config, const FeatureMap* features) {
  Trainer trainer(data, emb, config, features);
  if (config.pretrain_epochs > 0 && config.mode != ModelMode::SurfaceOnly)
    trainer.pretrain_features(config.pretrain_epochs);
  TrainResult result;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    result.log.push_back(trainer.run_epoch());
    if (config.target_accuracy > 0.0 &&
        result.log.back().train_accuracy >= config.target_accuracy)
      break;
  }
  result.model = trainer.model();
  return result;
}

std::string format_log(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.10f\t%.6f\n", e.epoch, e.mean_objective,
                  e.train_accuracy);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Data views

Dataset resample_balanced(const Dataset& data, const std::string& positive,
                          std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.instances.size(); ++i) {
    const auto& l = data.instances[i].labels;
    (std::find(l.begin(), l.end(), positive) != l.end() ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty())
    throw Error(ErrorCode::OneClassEmpty,
                "resampling needs positive and negative instances for " + positive);
  Dataset out = data;
  const auto& minority = pos.size() < neg.size() ? pos : neg;
  const std::size_t target = std::max(pos.size(), neg.size());
  Rng rng(seed);
  for (std::size_t n = minority.size(); n < target; ++n)
    out.instances.push_back(data.instances[minority[rng.below(minority.size())]]);
  return out;
}

std::pair<Dataset, Dataset> split_dev(const Dataset& data, double fraction,
                                      std::uint64_t seed) {
  std::vector<std::size_t> order(data.instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto dev_n = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> dev(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(dev_n));
  std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(dev_n), order.end());
  std::sort(dev.begin(), dev.end());
  std::sort(tr.begin(), tr.end());
  auto subset = [&](const std::vector<std::size_t>& idx, const char* split) {
    Dataset d;
    d.labels = data.labels;
    d.source = data.source;
    d.split = split;
    for (std::size_t i : idx) d.instances.push_back(data.instances[i]);
    return d;
  };
  return {subset(tr, "train"), subset(dev, "dev")};
}

}  // namespace updown
