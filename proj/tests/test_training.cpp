#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "updown/evaluation.hpp"
#include "updown/gradcheck.hpp"
#include "updown/training.hpp"

using namespace updown;
using updown::testing::error_code_of;
using updown::testing::make_embeddings;
using updown::testing::vec;

namespace {

Instance tiny_instance() {
  return parse_instance(
      R"J({"id":"t","arg1_trees":["(S a b)"],"arg2_trees":["(S b a)"],)J"
      R"J("mentions":[{"arg":1,"span":[0,1]},{"arg":2,"span":[1,2]}],"chains":[[0,1]],"labels":["L0"]})J",
      AlignmentPolicy::AllPairs);
}

Model surface_model(std::size_t labels, std::size_t f) {
  Model m;
  m.mode = ModelMode::SurfaceOnly;
  for (std::size_t y = 0; y < labels; ++y) m.labels.push_back("L" + std::to_string(y));
  std::vector<FeatureMap::Entry> entries;
  for (std::size_t i = 0; i < f; ++i) entries.push_back({"lex:k" + std::to_string(i), 0.0, {}});
  m.features = FeatureMap(entries);
  m.params = ModelParams::zeros(1, labels, f);
  return m;
}

Gradients unit_gradients(const ModelParams& shape, ModelMode mode, double value) {
  Gradients g{ModelParams::zeros_like(shape), active_tensors(mode)};
  for (ParamTensor t : all_tensors())
    if (g.has(t))
      for (double& v : g.tensor(t)) v = value;
  return g;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("hinge loss") {
  CHECK(hinge_loss(vec({2.0, 0.5, 1.0}), 0) == 0.0);
  CHECK(hinge_loss(vec({0.3, 0.3}), 0) == 1.0);
  const Vector psi = vec({0.2, 0.5, -0.1});
  double oracle = 0.0;
  for (int y : {1, 2}) oracle += std::max(0.0, 1.0 - psi(0) + psi(y));
  CHECK(hinge_loss(psi, 0) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK(hinge_loss(psi, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("surface-only gradients by hand") {
  Model m = surface_model(3, 4);
  Instance inst = tiny_instance();
  inst.features = vec({1, 0, 1, 1});
  const WordEmbeddings emb = make_embeddings({"a", "b"}, {{1}, {2}});
  const GroupValues lambda{};
  const Gradients g = backward(m, emb, inst, 0, lambda);
  CHECK_FALSE(g.has(ParamTensor::Up));
  CHECK_FALSE(g.has(ParamTensor::Root1));
  CHECK(g.has(ParamTensor::Features));
  // Zero parameters: both non-gold labels violate the margin.
  const RowMatrix& beta = g.values.classifier.features;
  CHECK(Vector(beta.row(0).transpose()) == -2.0 * inst.features);
  CHECK(Vector(beta.row(1).transpose()) == inst.features);
  CHECK(Vector(beta.row(2).transpose()) == inst.features);
  CHECK(g.values.classifier.bias == vec({-2, 1, 1}));

  // Push gold far ahead: flat region, zero gradient.
  m.params.classifier.bias(0) = 5.0;
  const Gradients flat = backward(m, emb, inst, 0, lambda);
  for (ParamTensor t : all_tensors())
    for (double v : flat.tensor(t)) CHECK(v == 0.0);
}

TEST_CASE("full-mode gradient matches finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    RandomProblem p = random_problem(ModelMode::Full, 3, 3, 4, rng);
    const Gradients analytic = backward(p.model, p.embeddings, p.instance, p.gold, p.lambda);
    const FiniteDiffResult fd =
        finite_diff_grad(p.model, p.embeddings, p.instance, p.gold, p.lambda, 1e-6);
    if (fd.near_kink) continue;
    for (ParamTensor t : all_tensors()) {
      if (!analytic.has(t)) continue;
      const auto a = analytic.tensor(t);
      const auto n = fd.grads.tensor(t);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(relative_error(a[i], n[i], 1e-4) < 1e-4);
    }
  }
}

TEST_CASE("finite differences of the regularizer alone") {
  // Gold well ahead, so only (lambda / 2) ||theta||^2 varies.
  Rng rng(4);
  RandomProblem p = random_problem(ModelMode::UpwardFeatures, 2, 2, 3, rng);
  for (Eigen::Index y = 0; y < 2; ++y)
    p.model.params.classifier.bias(y) = y == static_cast<Eigen::Index>(p.gold) ? 4.0 : -4.0;
  REQUIRE(hinge_loss(decision_scores(p.model, p.embeddings, p.instance), p.gold) == 0.0);
  p.lambda = {0.3, 0.3, 0.3, 0.3};
  const FiniteDiffResult fd = finite_diff_grad(p.model, p.embeddings, p.instance, p.gold, p.lambda, 1e-6);
  for (ParamTensor t : all_tensors()) {
    if (!fd.grads.has(t)) continue;
    const auto theta = p.model.params.tensor(t);
    const auto g = fd.grads.tensor(t);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - 0.3 * theta[i]) <= 1e-8);
  }

  p.lambda = {};
  const FiniteDiffResult flat = finite_diff_grad(p.model, p.embeddings, p.instance, p.gold, p.lambda, 1e-6);
  for (ParamTensor t : all_tensors())
    for (double v : flat.grads.tensor(t)) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("finite difference step sizes agree") {
  Rng rng(12);
  RandomProblem p = random_problem(ModelMode::Full, 5, 3, 4, rng);
  const auto a = finite_diff_grad(p.model, p.embeddings, p.instance, p.gold, p.lambda, 1e-5);
  const auto b = finite_diff_grad(p.model, p.embeddings, p.instance, p.gold, p.lambda, 1e-6);
  REQUIRE_FALSE(a.near_kink);
  for (ParamTensor t : all_tensors()) {
    if (!a.grads.has(t)) continue;
    const auto x = a.grads.tensor(t);
    const auto y = b.grads.tensor(t);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-6);
  }
}

TEST_CASE("clipping") {
  const ModelParams shape = ModelParams::zeros(2, 2, 3);
  Gradients big = unit_gradients(shape, ModelMode::Full, 1.0);
  // Classification group: 6 * 2 * 2 + 2 = 26 coordinates, norm sqrt(26).
  const double before = big.group_norm(ParamGroup::Classification);
  CHECK(before == doctest::Approx(std::sqrt(26.0)));
  clip(big, 5.0);
  CHECK(std::abs(big.group_norm(ParamGroup::Classification) - 5.0) <= 1e-12);
  // Upward: 8 coordinates, norm sqrt(8) < 5, untouched.
  for (double v : big.tensor(ParamTensor::Up)) CHECK(v == 1.0);

  Gradients ten = unit_gradients(ModelParams::zeros(1, 1, 0), ModelMode::Upward, 0.0);
  ten.tensor(ParamTensor::Up)[0] = 6.0;
  ten.tensor(ParamTensor::Up)[1] = 8.0;
  clip(ten, 5.0);
  CHECK(ten.tensor(ParamTensor::Up)[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(ten.tensor(ParamTensor::Up)[1] == doctest::Approx(4.0).epsilon(1e-15));

  Gradients zero = unit_gradients(shape, ModelMode::Full, 0.0);
  clip(zero, 5.0);
  CHECK(zero.group_norm(ParamGroup::Upward) == 0.0);

  Gradients bad = unit_gradients(shape, ModelMode::Full, 0.0);
  bad.tensor(ParamTensor::Bias)[0] = std::nan("");
  CHECK(error_code_of([&] { clip(bad, 5.0); }) == ErrorCode::NonFiniteGradient);
}

TEST_CASE("adagrad arithmetic") {
  ModelParams p = ModelParams::zeros(1, 1, 0);
  OptimizerState state = OptimizerState::for_params(p);
  TrainConfig cfg;
  cfg.set_eta(0.1);
  Gradients g = unit_gradients(p, ModelMode::Upward, 0.0);
  g.tensor(ParamTensor::Bias)[0] = 2.0;
  adagrad_step(p, g, state, cfg);
  const auto bias = static_cast<std::size_t>(ParamTensor::Bias);
  CHECK(state.accum[bias][0] == 4.0);
  CHECK(p.classifier.bias(0) == doctest::Approx(-0.1 * 2.0 / std::sqrt(4.0 + 1e-8)).epsilon(1e-15));
  // Zero gradient leaves theta and the accumulator alone.
  const double up0 = p.composition.up(0, 0);
  adagrad_step(p, unit_gradients(p, ModelMode::Upward, 0.0), state, cfg);
  CHECK(p.composition.up(0, 0) == up0);
  CHECK(state.accum[bias][0] == 4.0);

  ModelParams q = ModelParams::zeros(1, 1, 0);
  OptimizerState qs = OptimizerState::for_params(q);
  Gradients one = unit_gradients(q, ModelMode::Upward, 0.0);
  one.tensor(ParamTensor::Bias)[0] = 1.0;
  adagrad_step(q, one, qs, cfg);
  const double first = -q.classifier.bias(0);
  adagrad_step(q, one, qs, cfg);
  const double second = -q.classifier.bias(0) - first;
  CHECK(second < first);
  CHECK(second / first == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));

  ModelParams other = ModelParams::zeros(2, 1, 0);
  CHECK(error_code_of([&] { adagrad_step(other, one, qs, cfg); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("initialization") {
  CHECK(init_bound(50) == doctest::Approx(0.244949).epsilon(1e-6));
  for (std::size_t k : {1, 5, 20}) {
    const ModelParams p = init_params(k, 3, 2, 42);
    CHECK(p.composition.up.cwiseAbs().maxCoeff() <= init_bound(k));
    CHECK(p.composition.down.cwiseAbs().maxCoeff() <= init_bound(k));
    CHECK(p.classifier.root1.isZero());
    CHECK(p.classifier.bias.isZero());
    CHECK(bitwise_equal(p, init_params(k, 3, 2, 42)));
  }
  CHECK_FALSE(bitwise_equal(init_params(5, 3, 2, 1), init_params(5, 3, 2, 2)));
}

TEST_CASE("single label: only regularization moves parameters") {
  SynthSpec spec;
  spec.pairs = 3;
  spec.dim = 4;
  SynthCorpus c = synth_generate(spec);
  for (auto& inst : c.data.instances) inst.labels = {"Only"};
  c.data.labels = {"Only"};
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.mode = ModelMode::UpwardDownward;
  cfg.epochs = 3;
  cfg.set_lambda(0.1);
  const ModelParams init = init_params(4, 1, 0, cfg.seed);
  const TrainResult r = train(c.data, c.embeddings, cfg);
  for (const auto& e : r.log) CHECK(e.train_accuracy == 1.0);
  CHECK(r.model.params.composition.up.norm() < init.composition.up.norm());
  CHECK(r.model.params.classifier.bias.isZero());
}

TEST_CASE("objective decreases early on the synthetic corpus") {
  SynthSpec spec;
  spec.pairs = 30;
  spec.dim = 8;
  const SynthCorpus c = synth_generate(spec);
  std::size_t decreasing_seeds = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.mode = ModelMode::UpwardDownward;
    cfg.epochs = 10;
    cfg.seed = seed;
    const TrainResult r = train(c.data, c.embeddings, cfg);
    decreasing_seeds += r.log.back().mean_objective < r.log.front().mean_objective;
  }
  CHECK(decreasing_seeds >= 8);
}

TEST_CASE("trainer preconditions") {
  Dataset empty;
  const WordEmbeddings emb = make_embeddings({"a", "b"}, {{1, 0}, {0, 1}});
  TrainConfig cfg;
  cfg.dim = 2;
  CHECK(error_code_of([&] { Trainer(empty, emb, cfg); }) == ErrorCode::EmptyDataset);
  Dataset one;
  one.instances.push_back(tiny_instance());
  one.labels = {"L0"};
  CHECK(error_code_of([&] { Trainer(one, emb, cfg); }) == ErrorCode::ModeFeatureMapMissing);
  cfg.mode = ModelMode::Upward;
  cfg.dim = 3;
  CHECK(error_code_of([&] { Trainer(one, emb, cfg); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("balanced resampling") {
  Dataset d;
  d.labels = {"P", "Other"};
  for (int i = 0; i < 400; ++i) {
    Instance inst;
    inst.id = std::to_string(i);
    inst.labels = {i < 100 ? "P" : "Other"};
    d.instances.push_back(inst);
  }
  auto count = [](const Dataset& x, const std::string& l) {
    std::size_t n = 0;
    for (const auto& i : x.instances) n += i.labels[0] == l;
    return n;
  };
  const Dataset r = resample_balanced(d, "P", 3);
  CHECK(count(r, "P") == 300);
  CHECK(count(r, "Other") == 300);
  CHECK(resample_balanced(r, "P", 3).instances.size() == 600);

  Dataset small;
  small.labels = {"P", "Other"};
  for (int i = 0; i < 5; ++i) {
    Instance inst;
    inst.id = std::to_string(i);
    inst.labels = {i == 0 ? "P" : "Other"};
    small.instances.push_back(inst);
  }
  const Dataset s = resample_balanced(small, "P", 1);
  std::size_t copies = 0;
  for (const auto& i : s.instances) copies += i.id == "0";
  CHECK(copies == 4);

  Dataset none = small;
  none.instances.erase(none.instances.begin());
  CHECK(error_code_of([&] { resample_balanced(none, "P", 1); }) == ErrorCode::OneClassEmpty);
}

TEST_CASE("dev split") {
  Dataset d;
  for (int i = 0; i < 103; ++i) {
    Instance inst;
    inst.id = std::to_string(i);
    inst.labels = {"A"};
    d.instances.push_back(inst);
  }
  const auto [train_part, dev] = split_dev(d, 0.2, 5);
  CHECK(dev.instances.size() == 21);
  CHECK(train_part.instances.size() == 82);
  const auto [t2, d2] = split_dev(d, 0.2, 5);
  for (std::size_t i = 0; i < dev.instances.size(); ++i) CHECK(d2.instances[i].id == dev.instances[i].id);
}

TEST_CASE("config json") {
  TrainConfig c;
  c.dim = 7;
  at(c.lambda, ParamGroup::Downward) = 0.5;
  const TrainConfig back = config_from_json(to_json(c));
  CHECK(back.dim == 7);
  CHECK(at(back.lambda, ParamGroup::Downward) == 0.5);
  CHECK(to_json(back) == to_json(c));
  const TrainConfig scalar = config_from_json(nlohmann::json{{"eta", 0.3}, {"mode", "upward"}});
  for (double e : scalar.eta) CHECK(e == 0.3);
  CHECK(scalar.mode == ModelMode::Upward);
}

}  // TEST_SUITE
