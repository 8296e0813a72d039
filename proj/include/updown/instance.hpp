#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "updown/embeddings.hpp"
#include "updown/tree.hpp"

namespace updown {

enum class Side : std::uint8_t { M = 1, N = 2 };

struct Mention {
  Side side = Side::M;
  std::size_t begin = 0;  // token offsets within the unified argument
  std::size_t end = 0;

  bool operator==(const Mention&) const = default;
};

using AlignedPair = std::pair<NodeId, NodeId>;  // (node in m, node in n)

enum class AlignmentPolicy { AllPairs, FirstPair };

// One argument pair. Trees are kept both in their original n-ary form (for
// production features) and as the unified binary tree used for composition.
struct Instance {
  std::string id;
  std::vector<std::string> arg_m_text;
  std::vector<std::string> arg_n_text;
  std::vector<RawTree> arg_m_raw;
  std::vector<RawTree> arg_n_raw;
  BinaryTree arg_m;
  BinaryTree arg_n;
  std::vector<Mention> mentions;
  std::vector<NodeId> mention_nodes;  // parallel to mentions
  std::vector<std::vector<std::size_t>> chains;
  std::vector<AlignedPair> alignment;
  std::vector<std::string> labels;  // one or two gold labels
  std::string split;
  Vector features;  // filled by vectorize(); empty until then

  const BinaryTree& tree(Side s) const { return s == Side::M ? arg_m : arg_n; }
  bool has_shared_entities() const { return !alignment.empty(); }
};

// Cross-argument node pairs for every chain with mentions on both sides.
// Chains confined to one argument contribute nothing.
std::vector<AlignedPair> build_alignments(const Instance& instance,
                                          AlignmentPolicy policy);

struct Dataset {
  std::vector<Instance> instances;
  std::vector<std::string> labels;  // ordered label set Y
  std::string source;
  std::string split;

  std::size_t label_index(std::string_view label) const;  // throws LabelMismatch
  bool has_label(std::string_view label) const;
};

// (instance index, gold label index); double-labeled instances appear once
// per gold label.
struct LabeledRef {
  std::size_t instance = 0;
  std::size_t label = 0;
};
std::vector<LabeledRef> training_view(const Dataset& data);

// Parses one JSONL record: id, arg1_trees, arg2_trees, mentions
// [{arg, span: [begin, end)}], chains, labels, optional split.
Instance parse_instance(std::string_view json_line, AlignmentPolicy policy);

// Reads an instance file. Label order is the sorted set of labels seen,
// unless the caller later applies a preset. Errors carry the line number.
Dataset read_dataset(std::istream& in, AlignmentPolicy policy,
                     std::string source = {});
Dataset load_dataset(const std::string& path,
                     AlignmentPolicy policy = AlignmentPolicy::AllPairs);

std::string instance_to_json(const Instance& instance);
void write_dataset(std::ostream& out, const Dataset& data);

// Label presets applied at preparation time.
enum class LabelPreset {
  None,
  Multiclass11,  // second-level types minus the five rare ones
  Binary4,       // first-level classes, EntRel grouped with Expansion
};

LabelPreset parse_label_preset(std::string_view name);
const std::vector<std::string>& preset_labels(LabelPreset preset);
// Maps one raw label under a preset; empty string when the label is dropped.
std::string map_label(LabelPreset preset, std::string_view label);
// Relabels every instance, dropping instances left without labels.
Dataset apply_preset(const Dataset& data, LabelPreset preset);

// Two-class view for one-vs-all training: labels {positive, "Other"}.
inline constexpr std::string_view kOtherLabel = "Other";
Dataset one_vs_rest(const Dataset& data, const std::string& positive);

}  // namespace updown
