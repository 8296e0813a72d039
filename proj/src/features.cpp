#include "updown/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <set>

#include "updown/error.hpp"

namespace updown {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view category_of(std::string_view key) {
  return key.substr(0, key.find(':'));
}

void collect_productions(const RawTree& tree, std::set<std::string>& out) {
  if (tree.is_leaf()) return;
  std::string rule = tree.label + "→";
  for (std::size_t i = 0; i < tree.children.size(); ++i) {
    const RawTree& c = tree.children[i];
    if (i) rule += ' ';
    rule += c.is_leaf() ? c.token : c.label;
  }
  out.insert(std::move(rule));
  for (const auto& c : tree.children) collect_productions(c, out);
}

std::set<std::string> productions(const std::vector<RawTree>& trees) {
  std::set<std::string> out;
  for (const auto& t : trees) collect_productions(t, out);
  return out;
}

}  // namespace

SparseCounts extract_lexical_pairs(const Instance& instance) {
  SparseCounts counts;
  const auto left = instance.arg_m.tokens();
  const auto right = instance.arg_n.tokens();
  for (const auto& w1 : left)
    for (const auto& w2 : right) counts["lex:" + lowercase(w1) + "|" + lowercase(w2)] = 1;
  return counts;
}

SparseCounts extract_productions(const Instance& instance) {
  SparseCounts counts;
  const auto in_m = productions(instance.arg_m_raw);
  const auto in_n = productions(instance.arg_n_raw);
  for (const auto& r : in_m) {
    counts["prod:m:" + r] = 1;
    if (in_n.contains(r)) counts["prod:both:" + r] = 1;
  }
  for (const auto& r : in_n) counts["prod:n:" + r] = 1;
  return counts;
}

SparseCounts extract_features(const Instance& instance) {
  SparseCounts counts = extract_lexical_pairs(instance);
  counts.merge(extract_productions(instance));
  return counts;
}

double mutual_information(std::span<const std::size_t> present_by_label,
                          std::span<const std::size_t> label_totals) {
  std::size_t n = 0, present = 0, labels_seen = 0;
  for (std::size_t y = 0; y < label_totals.size(); ++y) {
    n += label_totals[y];
    present += present_by_label[y];
    if (label_totals[y] > 0) ++labels_seen;
  }
  if (labels_seen < 2)
    throw Error(ErrorCode::DegenerateCorpus, "mutual information needs two labels");
  const double total = static_cast<double>(n);
  const double marginal[2] = {static_cast<double>(n - present), static_cast<double>(present)};
  double mi = 0.0;
  for (std::size_t y = 0; y < label_totals.size(); ++y) {
    const double ny = static_cast<double>(label_totals[y]);
    const double joint[2] = {ny - static_cast<double>(present_by_label[y]),
                             static_cast<double>(present_by_label[y])};
    for (int x = 0; x < 2; ++x) {
      if (joint[x] == 0.0) continue;
      mi += joint[x] / total * std::log(joint[x] * total / (marginal[x] * ny));
    }
  }
  return std::max(mi, 0.0);
}

double mutual_information(const std::vector<bool>& presence,
                          std::span<const std::size_t> labels,
                          std::size_t num_labels) {
  std::vector<std::size_t> present(num_labels, 0), totals(num_labels, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++totals[labels[i]];
    if (presence[i]) ++present[labels[i]];
  }
  return mutual_information(present, totals);
}

std::vector<CategoryBudget> default_budgets() { return {{"lex", 500}, {"prod", 100}}; }

double quantize_mi(double mi) { return std::round(mi * 1e12); }

// ---------------------------------------------------------------------------

FeatureMap::FeatureMap(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].key, i).second)
      throw Error(ErrorCode::MalformedModel, "duplicate feature key " + entries_[i].key);
  }
}

std::optional<std::size_t> FeatureMap::column(std::string_view key) const {
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> FeatureMap::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.key);
  return out;
}

std::uint64_t FeatureMap::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& e : entries_) {
    for (unsigned char c : e.key) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  return h;
}

void FeatureMap::write(std::ostream& out) const {
  char buf[64];
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", entries_[i].mi);
    out << i << '\t' << entries_[i].key << '\t' << buf << '\n';
  }
}

FeatureMap select_features(std::span<const SparseCounts> entries,
                           std::span<const std::size_t> labels,
                           std::size_t num_labels,
                           std::span<const CategoryBudget> budgets) {
  std::vector<std::size_t> totals(num_labels, 0);
  for (std::size_t y : labels) ++totals[y];

  // key -> per-label presence counts
  std::map<std::string, std::vector<std::size_t>> table;
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (const auto& [key, count] : entries[i]) {
      auto& row = table[key];
      if (row.empty()) row.assign(num_labels, 0);
      if (count > 0) ++row[labels[i]];
    }

  std::vector<FeatureMap::Entry> selected;
  std::map<std::string, std::size_t> shortfall;
  for (const auto& b : budgets) {
    std::vector<FeatureMap::Entry> candidates;
    for (const auto& [key, row] : table)
      if (category_of(key) == b.category)
        candidates.push_back({key, mutual_information(row, totals), row});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const FeatureMap::Entry& a, const FeatureMap::Entry& c) {
                       const double qa = quantize_mi(a.mi), qc = quantize_mi(c.mi);
                       if (qa != qc) return qa > qc;
                       return a.key < c.key;
                     });
    if (candidates.size() > b.budget) candidates.resize(b.budget);
    shortfall[b.category] = b.budget - candidates.size();
    for (auto& c : candidates) selected.push_back(std::move(c));
  }
  FeatureMap map(std::move(selected));
  map.shortfall = std::move(shortfall);
  map.label_totals = std::move(totals);
  return map;
}

FeatureMap select_features(const Dataset& data,
                           std::span<const CategoryBudget> budgets) {
  const auto view = training_view(data);
  std::vector<SparseCounts> per_instance;
  per_instance.reserve(data.instances.size());
  for (const auto& inst : data.instances) per_instance.push_back(extract_features(inst));
  std::vector<SparseCounts> entries;
  std::vector<std::size_t> labels;
  for (const auto& ref : view) {
    entries.push_back(per_instance[ref.instance]);
    labels.push_back(ref.label);
  }
  return select_features(entries, labels, data.labels.size(), budgets);
}

Vector vectorize(const SparseCounts& counts, const FeatureMap& map) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(map.size()));
  for (const auto& [key, count] : counts)
    if (count > 0)
      if (const auto col = map.column(key)) v(static_cast<Eigen::Index>(*col)) = 1.0;
  return v;
}

Vector vectorize(const Instance& instance, const FeatureMap& map) {
  return vectorize(extract_features(instance), map);
}

Dataset attach_features(Dataset data, const FeatureMap& map) {
  for (auto& inst : data.instances) inst.features = vectorize(inst, map);
  return data;
}

}  // namespace updown
