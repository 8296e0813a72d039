#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "updown/classifier.hpp"
#include "updown/composition.hpp"
#include "updown/features.hpp"

namespace updown {

// Hyperparameter groups: each has its own regularizer, learning rate and
// clipping norm.
enum class ParamGroup : std::uint8_t { Upward, Downward, Features, Classification };
inline constexpr std::size_t kGroupCount = 4;
inline constexpr std::array<ParamGroup, kGroupCount> kGroups{
    ParamGroup::Upward, ParamGroup::Downward, ParamGroup::Features,
    ParamGroup::Classification};

std::string_view to_string(ParamGroup group);

enum class ParamTensor : std::uint8_t {
  Up, Down,
  Root1, Root2, Root3,
  Entity1, Entity2, Entity3,
  Features, Bias,
};
inline constexpr std::size_t kTensorCount = 10;

std::string_view to_string(ParamTensor tensor);
ParamGroup group_of(ParamTensor tensor);
std::span<const ParamTensor> all_tensors();

using TensorMask = std::bitset<kTensorCount>;
TensorMask active_tensors(ModelMode mode);

// Trainable parameters. Word embeddings are deliberately not part of this.
struct ModelParams {
  CompositionParams composition;
  ClassifierParams classifier;

  std::span<double> tensor(ParamTensor t);
  std::span<const double> tensor(ParamTensor t) const;

  std::size_t dim() const { return composition.dim(); }
  static ModelParams zeros(std::size_t k, std::size_t labels, std::size_t f);
  static ModelParams zeros_like(const ModelParams& other);
  bool same_shape(const ModelParams& other) const;
};

bool bitwise_equal(std::span<const double> a, std::span<const double> b);
bool bitwise_equal(const ModelParams& a, const ModelParams& b);

struct Model {
  ModelMode mode = ModelMode::Full;
  std::vector<std::string> labels;
  FeatureMap features;
  ModelParams params;

  std::size_t dim() const { return params.dim(); }
};

// Text container, line oriented:
//   updown-model 1
//   mode <name> / dim <K> / labels <n> + one label per line
//   features <F> <fnv64 hex> + one "<mi hexfloat><TAB><key>" per line
//   tensor <name> <rows> <cols> + one line of hexfloats per row
//   end
// Every real is written as a C99 hexadecimal float, so reading a model back
// reproduces it bit for bit.
void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace updown
