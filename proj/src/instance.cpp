#include "updown/instance.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <set>

#include <json.hpp>

#include "updown/error.hpp"

namespace updown {

using nlohmann::json;

std::vector<AlignedPair> build_alignments(const Instance& instance,
                                          AlignmentPolicy policy) {
  std::vector<AlignedPair> pairs;
  auto earlier = [&](std::size_t a, std::size_t b) {
    const Mention& x = instance.mentions[a];
    const Mention& y = instance.mentions[b];
    return std::pair(x.begin, x.end) < std::pair(y.begin, y.end);
  };
  for (const auto& chain : instance.chains) {
    std::vector<std::size_t> in_m, in_n;
    for (std::size_t idx : chain)
      (instance.mentions[idx].side == Side::M ? in_m : in_n).push_back(idx);
    if (in_m.empty() || in_n.empty()) continue;
    std::sort(in_m.begin(), in_m.end(), earlier);
    std::sort(in_n.begin(), in_n.end(), earlier);
    if (policy == AlignmentPolicy::FirstPair) {
      in_m.resize(1);
      in_n.resize(1);
    }
    for (std::size_t i : in_m)
      for (std::size_t j : in_n)
        pairs.emplace_back(instance.mention_nodes[i], instance.mention_nodes[j]);
  }
  return pairs;
}

std::size_t Dataset::label_index(std::string_view label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end())
    throw Error(ErrorCode::LabelMismatch,
                "label '" + std::string(label) + "' not in label set");
  return static_cast<std::size_t>(it - labels.begin());
}

bool Dataset::has_label(std::string_view label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::vector<LabeledRef> training_view(const Dataset& data) {
  std::vector<LabeledRef> view;
  view.reserve(data.instances.size());
  for (std::size_t i = 0; i < data.instances.size(); ++i)
    for (const auto& label : data.instances[i].labels)
      view.push_back({i, data.label_index(label)});
  return view;
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::MalformedInstance, why);
}

BinaryTree build_argument(const std::vector<std::string>& texts,
                          std::vector<RawTree>& raw_out) {
  if (texts.empty()) malformed("argument has no trees");
  std::vector<BinaryTree> parts;
  for (const auto& text : texts) {
    raw_out.push_back(parse_bracketed_tree(text));
    parts.push_back(binarize(raw_out.back()));
  }
  return unify_spans(parts);
}

}  // namespace

Instance parse_instance(std::string_view json_line, AlignmentPolicy policy) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::exception& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("record is not a JSON object");
  Instance inst;
  try {
    inst.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                     : j.at("id").dump();
    inst.arg_m_text = j.at("arg1_trees").get<std::vector<std::string>>();
    inst.arg_n_text = j.at("arg2_trees").get<std::vector<std::string>>();
    inst.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("split") && !j["split"].is_null())
      inst.split = j["split"].get<std::string>();
    for (const auto& m : j.value("mentions", json::array())) {
      const int arg = m.at("arg").get<int>();
      if (arg != 1 && arg != 2) malformed("mention arg must be 1 or 2");
      const auto span = m.at("span").get<std::vector<std::size_t>>();
      if (span.size() != 2) malformed("mention span must be [begin, end)");
      inst.mentions.push_back({arg == 1 ? Side::M : Side::N, span[0], span[1]});
    }
    inst.chains = j.value("chains", json::array())
                      .get<std::vector<std::vector<std::size_t>>>();
  } catch (const json::exception& e) {
    malformed(std::string("bad field: ") + e.what());
  }
  if (inst.labels.empty() || inst.labels.size() > 2)
    malformed("an instance needs one or two labels");
  inst.arg_m = build_argument(inst.arg_m_text, inst.arg_m_raw);
  inst.arg_n = build_argument(inst.arg_n_text, inst.arg_n_raw);
  for (const auto& m : inst.mentions)
    inst.mention_nodes.push_back(resolve_mention_node(inst.tree(m.side), m.begin, m.end));
  std::vector<int> owner(inst.mentions.size(), -1);
  for (std::size_t c = 0; c < inst.chains.size(); ++c) {
    for (std::size_t idx : inst.chains[c]) {
      if (idx >= inst.mentions.size()) malformed("chain references unknown mention");
      if (owner[idx] != -1) malformed("mention belongs to two chains");
      owner[idx] = static_cast<int>(c);
    }
  }
  inst.alignment = build_alignments(inst, policy);
  return inst;
}

Dataset read_dataset(std::istream& in, AlignmentPolicy policy,
                     std::string source) {
  Dataset data;
  data.source = std::move(source);
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      data.instances.push_back(parse_instance(line, policy));
    } catch (const Error& e) {
      throw Error(e.code(), data.source + ":" + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
    for (const auto& l : data.instances.back().labels) seen.insert(l);
  }
  data.labels.assign(seen.begin(), seen.end());
  if (!data.instances.empty()) data.split = data.instances.front().split;
  return data;
}

Dataset load_dataset(const std::string& path, AlignmentPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open instance file " + path);
  return read_dataset(in, policy, path);
}

std::string instance_to_json(const Instance& inst) {
  json j;
  j["id"] = inst.id;
  j["arg1_trees"] = inst.arg_m_text;
  j["arg2_trees"] = inst.arg_n_text;
  json mentions = json::array();
  for (const auto& m : inst.mentions)
    mentions.push_back({{"arg", m.side == Side::M ? 1 : 2},
                        {"span", {m.begin, m.end}}});
  j["mentions"] = mentions;
  j["chains"] = inst.chains;
  j["labels"] = inst.labels;
  if (!inst.split.empty()) j["split"] = inst.split;
  return j.dump();
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (const auto& inst : data.instances) out << instance_to_json(inst) << '\n';
}

// ---------------------------------------------------------------------------

namespace {

struct SecondLevel {
  const char* top;
  const char* type;
  bool rare;
};

constexpr SecondLevel kSecondLevel[] = {
    {"Temporal", "Asynchronous", false},
    {"Temporal", "Synchrony", false},
    {"Contingency", "Cause", false},
    {"Contingency", "Pragmatic cause", false},
    {"Contingency", "Condition", true},
    {"Contingency", "Pragmatic condition", true},
    {"Comparison", "Contrast", false},
    {"Comparison", "Pragmatic contrast", true},
    {"Comparison", "Concession", false},
    {"Comparison", "Pragmatic concession", true},
    {"Expansion", "Conjunction", false},
    {"Expansion", "Instantiation", false},
    {"Expansion", "Restatement", false},
    {"Expansion", "Alternative", false},
    {"Expansion", "Exception", true},
    {"Expansion", "List", false},
};

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '_' || c == '-') c = ' ';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

const SecondLevel* find_second_level(std::string_view label) {
  const auto dot = label.rfind('.');
  const std::string type = fold(dot == std::string_view::npos ? label : label.substr(dot + 1));
  for (const auto& s : kSecondLevel)
    if (fold(s.type) == type) return &s;
  return nullptr;
}

}  // namespace

LabelPreset parse_label_preset(std::string_view name) {
  if (name == "none") return LabelPreset::None;
  if (name == "multiclass11") return LabelPreset::Multiclass11;
  if (name == "binary4") return LabelPreset::Binary4;
  throw Error(ErrorCode::LabelMismatch, "unknown label preset '" + std::string(name) + "'");
}

const std::vector<std::string>& preset_labels(LabelPreset preset) {
  static const std::vector<std::string> none;
  static const std::vector<std::string> multiclass = [] {
    std::vector<std::string> out;
    for (const auto& s : kSecondLevel)
      if (!s.rare) out.push_back(std::string(s.top) + "." + s.type);
    return out;
  }();
  static const std::vector<std::string> binary = {"Comparison", "Contingency",
                                                  "Expansion", "Temporal"};
  switch (preset) {
    case LabelPreset::Multiclass11: return multiclass;
    case LabelPreset::Binary4: return binary;
    case LabelPreset::None: break;
  }
  return none;
}

std::string map_label(LabelPreset preset, std::string_view label) {
  switch (preset) {
    case LabelPreset::None:
      return std::string(label);
    case LabelPreset::Multiclass11: {
      const SecondLevel* s = find_second_level(label);
      if (s == nullptr || s->rare) return {};
      return std::string(s->top) + "." + s->type;
    }
    case LabelPreset::Binary4: {
      const std::string f = fold(label.substr(0, label.find('.')));
      if (f == "entrel") return "Expansion";
      for (const auto& top : preset_labels(LabelPreset::Binary4))
        if (fold(top) == f) return top;
      if (const SecondLevel* s = find_second_level(label)) return s->top;
      return {};
    }
  }
  return {};
}

Dataset apply_preset(const Dataset& data, LabelPreset preset) {
  if (preset == LabelPreset::None) return data;
  Dataset out;
  out.source = data.source;
  out.split = data.split;
  out.labels = preset_labels(preset);
  for (const auto& inst : data.instances) {
    std::vector<std::string> mapped;
    for (const auto& l : inst.labels) {
      std::string m = map_label(preset, l);
      if (!m.empty() && std::find(mapped.begin(), mapped.end(), m) == mapped.end())
        mapped.push_back(std::move(m));
    }
    if (mapped.empty()) continue;
    Instance copy = inst;
    copy.labels = std::move(mapped);
    out.instances.push_back(std::move(copy));
  }
  return out;
}

Dataset one_vs_rest(const Dataset& data, const std::string& positive) {
  Dataset out;
  out.source = data.source;
  out.split = data.split;
  out.labels = {positive, std::string(kOtherLabel)};
  for (const auto& inst : data.instances) {
    Instance copy = inst;
    const bool pos = std::find(inst.labels.begin(), inst.labels.end(), positive) !=
                     inst.labels.end();
    copy.labels = {pos ? positive : std::string(kOtherLabel)};
    out.instances.push_back(std::move(copy));
  }
  return out;
}

}  // namespace updown
