#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "updown/embeddings.hpp"
#include "updown/instance.hpp"

namespace updown {

// Feature key -> count for one instance. Keys are namespaced by category
// ("lex:", "prod:"); all features are binary, so counts are 1.
using SparseCounts = std::map<std::string, int>;

// "lex:w1|w2" for every (w1 in arg m, w2 in arg n), lowercased.
SparseCounts extract_lexical_pairs(const Instance& instance);

// "prod:<side>:PARENT→CHILD1 CHILD2 ..." for every internal node of the
// original n-ary trees. <side> is m or n; a production found in both
// arguments additionally yields a "prod:both:" key.
SparseCounts extract_productions(const Instance& instance);

SparseCounts extract_features(const Instance& instance);

// MI between binary presence and the label, natural log, 0 log 0 = 0.
// `present_by_label[y]` counts entries with label y that have the feature;
// `label_totals[y]` counts entries with label y.
// Throws Error{DegenerateCorpus} when fewer than two labels occur.
double mutual_information(std::span<const std::size_t> present_by_label,
                          std::span<const std::size_t> label_totals);

// Same quantity from per-entry presence flags and label ids.
double mutual_information(const std::vector<bool>& presence,
                          std::span<const std::size_t> labels,
                          std::size_t num_labels);

struct CategoryBudget {
  std::string category;  // key prefix before the first ':'
  std::size_t budget = 0;
};

std::vector<CategoryBudget> default_budgets();  // lex 500, prod 100

class FeatureMap {
 public:
  struct Entry {
    std::string key;
    double mi = 0.0;
    std::vector<std::size_t> present_by_label;
  };

  FeatureMap() = default;
  explicit FeatureMap(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::optional<std::size_t> column(std::string_view key) const;
  std::vector<std::string> keys() const;

  // Requested budget minus selected count, per category.
  std::map<std::string, std::size_t> shortfall;
  std::vector<std::size_t> label_totals;

  // FNV-1a over the ordered key list.
  std::uint64_t hash() const;

  // "index<TAB>key<TAB>MI" per line.
  void write(std::ostream& out) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Ranks candidates per category by MI (descending; MI rounded to 1e-12 so
// that mathematically equal values tie), ties broken by key, keeps the top
// `budget`, and concatenates categories in budget order.
FeatureMap select_features(std::span<const SparseCounts> entries,
                           std::span<const std::size_t> labels,
                           std::size_t num_labels,
                           std::span<const CategoryBudget> budgets);

// Builds the map over the training view (double-labeled instances count once
// per gold label).
FeatureMap select_features(const Dataset& data,
                           std::span<const CategoryBudget> budgets);

Vector vectorize(const SparseCounts& counts, const FeatureMap& map);
Vector vectorize(const Instance& instance, const FeatureMap& map);

// Copy of `data` with every instance's feature slot filled.
Dataset attach_features(Dataset data, const FeatureMap& map);

double quantize_mi(double mi);

}  // namespace updown
