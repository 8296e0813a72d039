#include "updown/model.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "updown/error.hpp"

namespace updown {

namespace {

constexpr std::array<ParamTensor, kTensorCount> kTensors{
    ParamTensor::Up,      ParamTensor::Down,    ParamTensor::Root1,
    ParamTensor::Root2,   ParamTensor::Root3,   ParamTensor::Entity1,
    ParamTensor::Entity2, ParamTensor::Entity3, ParamTensor::Features,
    ParamTensor::Bias};

template <typename M>
std::span<double> as_span(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename M>
std::span<const double> as_span(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

std::string_view to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::Upward: return "upward";
    case ParamGroup::Downward: return "downward";
    case ParamGroup::Features: return "features";
    case ParamGroup::Classification: return "classification";
  }
  return "unknown";
}

std::string_view to_string(ParamTensor tensor) {
  switch (tensor) {
    case ParamTensor::Up: return "up";
    case ParamTensor::Down: return "down";
    case ParamTensor::Root1: return "root1";
    case ParamTensor::Root2: return "root2";
    case ParamTensor::Root3: return "root3";
    case ParamTensor::Entity1: return "entity1";
    case ParamTensor::Entity2: return "entity2";
    case ParamTensor::Entity3: return "entity3";
    case ParamTensor::Features: return "features";
    case ParamTensor::Bias: return "bias";
  }
  return "unknown";
}

ParamGroup group_of(ParamTensor tensor) {
  switch (tensor) {
    case ParamTensor::Up: return ParamGroup::Upward;
    case ParamTensor::Down: return ParamGroup::Downward;
    case ParamTensor::Features: return ParamGroup::Features;
    default: return ParamGroup::Classification;
  }
}

std::span<const ParamTensor> all_tensors() { return kTensors; }

TensorMask active_tensors(ModelMode mode) {
  TensorMask mask;
  auto on = [&](ParamTensor t) { mask.set(static_cast<std::size_t>(t)); };
  on(ParamTensor::Bias);
  if (uses_root_term(mode)) {
    on(ParamTensor::Root1);
    on(ParamTensor::Root2);
    on(ParamTensor::Root3);
  }
  if (uses_composition(mode)) on(ParamTensor::Up);
  if (uses_downward(mode)) {
    on(ParamTensor::Down);
    on(ParamTensor::Entity1);
    on(ParamTensor::Entity2);
    on(ParamTensor::Entity3);
  }
  if (uses_features(mode)) on(ParamTensor::Features);
  return mask;
}

std::span<double> ModelParams::tensor(ParamTensor t) {
  switch (t) {
    case ParamTensor::Up: return as_span(composition.up);
    case ParamTensor::Down: return as_span(composition.down);
    case ParamTensor::Root1: return as_span(classifier.root1);
    case ParamTensor::Root2: return as_span(classifier.root2);
    case ParamTensor::Root3: return as_span(classifier.root3);
    case ParamTensor::Entity1: return as_span(classifier.entity1);
    case ParamTensor::Entity2: return as_span(classifier.entity2);
    case ParamTensor::Entity3: return as_span(classifier.entity3);
    case ParamTensor::Features: return as_span(classifier.features);
    case ParamTensor::Bias: return as_span(classifier.bias);
  }
  return {};
}

std::span<const double> ModelParams::tensor(ParamTensor t) const {
  return const_cast<ModelParams*>(this)->tensor(t);
}

ModelParams ModelParams::zeros(std::size_t k, std::size_t labels, std::size_t f) {
  ModelParams p;
  const auto kk = static_cast<Eigen::Index>(k);
  p.composition.up = Matrix::Zero(kk, 2 * kk);
  p.composition.down = Matrix::Zero(kk, 2 * kk);
  p.classifier = ClassifierParams::zeros(labels, k, f);
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  return zeros(other.dim(), other.classifier.labels(), other.classifier.feature_dim());
}

bool ModelParams::same_shape(const ModelParams& other) const {
  for (ParamTensor t : kTensors)
    if (tensor(t).size() != other.tensor(t).size()) return false;
  return dim() == other.dim() && classifier.labels() == other.classifier.labels();
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  for (ParamTensor t : kTensors)
    if (!bitwise_equal(a.tensor(t), b.tensor(t))) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

[[noreturn]] void bad_model(const std::string& why) {
  throw Error(ErrorCode::MalformedModel, why);
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_model("bad number '" + s + "'");
  return v;
}

template <typename M>
void write_tensor(std::ostream& out, std::string_view name, const M& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << hexfloat(m(r, c));
    out << '\n';
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) bad_model("unexpected end of model file");
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  std::istringstream fields(std::string_view expected) {
    std::istringstream ss(line());
    std::string tag;
    ss >> tag;
    if (tag != expected) bad_model("expected '" + std::string(expected) + "', got '" + tag + "'");
    return ss;
  }

  template <typename M>
  void tensor(std::string_view name, M& m) {
    auto ss = fields("tensor");
    std::string got;
    Eigen::Index rows = -1, cols = -1;
    ss >> got >> rows >> cols;
    if (got != name || rows < 0 || cols < 0) bad_model("bad tensor header for " + std::string(name));
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row(line());
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string tok;
        if (!(row >> tok)) bad_model("short row in tensor " + std::string(name));
        m(r, c) = parse_hexfloat(tok);
      }
    }
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  out << "updown-model 1\n";
  out << "mode " << to_string(model.mode) << '\n';
  out << "dim " << model.dim() << '\n';
  out << "labels " << model.labels.size() << '\n';
  for (const auto& l : model.labels) out << l << '\n';
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(model.features.hash()));
  out << "features " << model.features.size() << ' ' << hash << '\n';
  for (const auto& e : model.features.entries()) out << hexfloat(e.mi) << '\t' << e.key << '\n';
  const auto& p = model.params;
  write_tensor(out, "up", p.composition.up);
  write_tensor(out, "down", p.composition.down);
  write_tensor(out, "root1", p.classifier.root1);
  write_tensor(out, "root2", p.classifier.root2);
  write_tensor(out, "root3", p.classifier.root3);
  write_tensor(out, "entity1", p.classifier.entity1);
  write_tensor(out, "entity2", p.classifier.entity2);
  write_tensor(out, "entity3", p.classifier.entity3);
  write_tensor(out, "features", p.classifier.features);
  Eigen::Matrix<double, Eigen::Dynamic, 1> bias = p.classifier.bias;
  write_tensor(out, "bias", bias);
  out << "end\n";
}

Model read_model(std::istream& in) {
  Reader r(in);
  Model m;
  {
    auto ss = r.fields("updown-model");
    int version = 0;
    ss >> version;
    if (version != 1) bad_model("unsupported model version");
  }
  {
    auto ss = r.fields("mode");
    std::string name;
    ss >> name;
    try {
      m.mode = parse_mode(name);
    } catch (const Error&) {
      bad_model("unknown mode " + name);
    }
  }
  std::size_t dim = 0, labels = 0, features = 0;
  r.fields("dim") >> dim;
  r.fields("labels") >> labels;
  for (std::size_t i = 0; i < labels; ++i) m.labels.push_back(r.line());
  std::string hash;
  {
    auto ss = r.fields("features");
    ss >> features >> hash;
  }
  std::vector<FeatureMap::Entry> entries;
  for (std::size_t i = 0; i < features; ++i) {
    const std::string s = r.line();
    const auto tab = s.find('\t');
    if (tab == std::string::npos) bad_model("bad feature line");
    entries.push_back({s.substr(tab + 1), parse_hexfloat(s.substr(0, tab)), {}});
  }
  m.features = FeatureMap(std::move(entries));
  char check[32];
  std::snprintf(check, sizeof check, "%016llx",
                static_cast<unsigned long long>(m.features.hash()));
  if (hash != check) bad_model("feature map hash mismatch");
  auto& p = m.params;
  r.tensor("up", p.composition.up);
  r.tensor("down", p.composition.down);
  r.tensor("root1", p.classifier.root1);
  r.tensor("root2", p.classifier.root2);
  r.tensor("root3", p.classifier.root3);
  r.tensor("entity1", p.classifier.entity1);
  r.tensor("entity2", p.classifier.entity2);
  r.tensor("entity3", p.classifier.entity3);
  r.tensor("features", p.classifier.features);
  Eigen::Matrix<double, Eigen::Dynamic, 1> bias;
  r.tensor("bias", bias);
  p.classifier.bias = bias;
  r.fields("end");
  if (p.dim() != dim || p.classifier.labels() != labels ||
      p.classifier.feature_dim() != features)
    bad_model("tensor shapes disagree with header");
  return m;
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write model " + path);
  write_model(out, model);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path);
  return read_model(in);
}

}  // namespace updown
