#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "updown/instance.hpp"
#include "updown/model.hpp"
#include "updown/training.hpp"

namespace updown {

struct SubsetReport {
  std::string name;
  std::size_t count = 0;
  double proportion = 0.0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::string protocol;
  std::size_t instances = 0;
  double accuracy = 0.0;

  // Binary protocol only.
  std::string positive;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precision_undefined = false;  // no predicted positives
  bool recall_undefined = false;     // no gold positives

  std::vector<SubsetReport> subsets;
  std::string fingerprint;

  // "field<TAB>value" lines in a fixed order.
  std::string to_text() const;
};

// Predicted label per instance, in dataset order. Feature vectors are
// derived from the model's feature map when the mode uses them.
std::vector<std::string> predict_labels(const Model& model, const WordEmbeddings& emb,
                                        const Dataset& data);

// Metric layer over predictions, independent of any model.
// A prediction is correct when it is any of the instance's gold labels.
EvalReport multiclass_report(const std::vector<std::string>& predicted, const Dataset& data);
EvalReport binary_report(const std::vector<std::string>& predicted, const Dataset& data,
                         const std::string& positive);
EvalReport coref_report(const std::vector<std::string>& predicted, const Dataset& data);

// Throws Error{LabelMismatch} when a gold label is not in the model's label set.
EvalReport eval_multiclass(const Model& model, const WordEmbeddings& emb, const Dataset& data);
EvalReport eval_binary(const Model& model, const WordEmbeddings& emb, const Dataset& data,
                       const std::string& positive);
EvalReport coref_subset_report(const Model& model, const WordEmbeddings& emb,
                               const Dataset& data);

std::string model_fingerprint(const Model& model);

// Synthetic entity-discrimination corpus: each pair of instances shares its
// trees and tokens exactly and differs only in which first-argument entity
// the second-argument pronoun corefers with, which decides the label.
struct SynthSpec {
  std::size_t pairs = 200;
  std::size_t dim = 20;
  std::uint64_t seed = 7;
  std::string subject_label = "Comparison.Contrast";  // pronoun -> giver
  std::string object_label = "Contingency.Cause";     // pronoun -> recipient
};

struct SynthCorpus {
  Dataset data;
  WordEmbeddings embeddings;  // standardized
};

SynthCorpus synth_generate(const SynthSpec& spec);

}  // namespace updown
