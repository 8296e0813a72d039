#include "updown/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "updown/error.hpp"
#include "updown/rng.hpp"

namespace updown {

namespace {

bool has_label(const Instance& inst, const std::string& label) {
  return std::find(inst.labels.begin(), inst.labels.end(), label) != inst.labels.end();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

void check_sizes(const std::vector<std::string>& predicted, const Dataset& data) {
  if (predicted.size() != data.instances.size())
    throw Error(ErrorCode::DimensionMismatch, "prediction count differs from instance count");
}

}  // namespace

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "protocol\t" << protocol << '\n';
  out << "instances\t" << instances << '\n';
  out << "accuracy\t" << fmt(accuracy) << '\n';
  if (protocol == "binary") {
    out << "positive\t" << positive << '\n';
    out << "tp\t" << tp << "\nfp\t" << fp << "\nfn\t" << fn << "\ntn\t" << tn << '\n';
    out << "precision\t" << fmt(precision) << (precision_undefined ? "\tundefined" : "") << '\n';
    out << "recall\t" << fmt(recall) << (recall_undefined ? "\tundefined" : "") << '\n';
    out << "f1\t" << fmt(f1) << '\n';
  }
  for (const auto& s : subsets)
    out << "subset\t" << s.name << '\t' << s.count << '\t' << fmt(s.proportion) << '\t'
        << fmt(s.accuracy) << '\n';
  if (!fingerprint.empty()) out << "fingerprint\t" << fingerprint << '\n';
  return out.str();
}

std::vector<std::string> predict_labels(const Model& model, const WordEmbeddings& emb,
                                        const Dataset& data) {
  std::vector<std::string> out;
  out.reserve(data.instances.size());
  for (const auto& inst : data.instances)
    out.push_back(model.labels[predict(decision_scores(model, emb, inst))]);
  return out;
}

EvalReport multiclass_report(const std::vector<std::string>& predicted, const Dataset& data) {
  check_sizes(predicted, data);
  EvalReport r;
  r.protocol = "multiclass";
  r.instances = data.instances.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (has_label(data.instances[i], predicted[i])) ++correct;
  r.accuracy = ratio(correct, r.instances);
  return r;
}

EvalReport binary_report(const std::vector<std::string>& predicted, const Dataset& data,
                         const std::string& positive) {
  check_sizes(predicted, data);
  EvalReport r;
  r.protocol = "binary";
  r.positive = positive;
  r.instances = data.instances.size();
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool gold = has_label(data.instances[i], positive);
    const bool pred = predicted[i] == positive;
    if (gold && pred) ++r.tp;
    else if (!gold && pred) ++r.fp;
    else if (gold && !pred) ++r.fn;
    else ++r.tn;
  }
  r.accuracy = ratio(r.tp + r.tn, r.instances);
  r.precision_undefined = r.tp + r.fp == 0;
  r.recall_undefined = r.tp + r.fn == 0;
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

EvalReport coref_report(const std::vector<std::string>& predicted, const Dataset& data) {
  EvalReport r = multiclass_report(predicted, data);
  r.protocol = "coref";
  std::size_t n_shared = 0, ok_shared = 0, n_plain = 0, ok_plain = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& inst = data.instances[i];
    const bool ok = has_label(inst, predicted[i]);
    if (inst.has_shared_entities()) {
      ++n_shared;
      ok_shared += ok;
    } else {
      ++n_plain;
      ok_plain += ok;
    }
  }
  r.subsets.push_back({"shared", n_shared, ratio(n_shared, r.instances), ratio(ok_shared, n_shared)});
  r.subsets.push_back({"unshared", n_plain, ratio(n_plain, r.instances), ratio(ok_plain, n_plain)});
  return r;
}

namespace {

void check_labels(const Model& model, const Dataset& data) {
  for (const auto& inst : data.instances)
    for (const auto& l : inst.labels)
      if (std::find(model.labels.begin(), model.labels.end(), l) == model.labels.end())
        throw Error(ErrorCode::LabelMismatch,
                    "instance " + inst.id + " has label '" + l + "' unknown to the model");
}

}  // namespace

EvalReport eval_multiclass(const Model& model, const WordEmbeddings& emb, const Dataset& data) {
  check_labels(model, data);
  EvalReport r = multiclass_report(predict_labels(model, emb, data), data);
  r.fingerprint = model_fingerprint(model);
  return r;
}

EvalReport eval_binary(const Model& model, const WordEmbeddings& emb, const Dataset& data,
                       const std::string& positive) {
  EvalReport r = binary_report(predict_labels(model, emb, data), data, positive);
  r.fingerprint = model_fingerprint(model);
  return r;
}

EvalReport coref_subset_report(const Model& model, const WordEmbeddings& emb,
                               const Dataset& data) {
  check_labels(model, data);
  EvalReport r = coref_report(predict_labels(model, emb, data), data);
  r.fingerprint = model_fingerprint(model);
  return r;
}

std::string model_fingerprint(const Model& model) {
  std::ostringstream out;
  write_model(out, model);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : out.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kNames = {
    "tina", "bob", "alice", "carlos", "dana", "emil", "fatima", "george",
    "hana", "ivan", "julia", "kenji", "laura", "marco", "nadia", "oscar",
    "priya", "quentin", "rosa", "samuel", "tariq", "uma", "victor", "wendy"};
const std::vector<std::string> kVerbs = {"gave", "handed", "sent", "showed",
                                         "offered", "passed", "sold", "brought"};
const std::vector<std::string> kThings = {"burger", "book", "ticket", "letter",
                                          "apple", "key", "coat", "map"};
const std::vector<std::string> kPronouns = {"she", "he", "they"};
const std::vector<std::string> kStates = {"hungry", "tired", "happy", "late",
                                          "angry", "cold", "busy", "sad"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

}  // namespace

SynthCorpus synth_generate(const SynthSpec& spec) {
  Rng rng(spec.seed);
  SynthCorpus out;
  out.data.source = "synthetic";
  out.data.split = "train";
  out.data.labels = {spec.subject_label, spec.object_label};
  std::sort(out.data.labels.begin(), out.data.labels.end());

  for (std::size_t p = 0; p < spec.pairs; ++p) {
    const std::string& giver = pick(rng, kNames);
    std::string recipient = pick(rng, kNames);
    while (recipient == giver) recipient = pick(rng, kNames);
    const std::string& verb = pick(rng, kVerbs);
    const std::string& thing = pick(rng, kThings);
    const std::string& pronoun = pick(rng, kPronouns);
    const std::string& state = pick(rng, kStates);
    const bool dative = rng.below(2) == 1;

    std::string arg1;
    std::size_t recipient_pos;
    if (dative) {  // giver verb the thing to recipient
      arg1 = "(S (NP " + giver + ") (VP (V " + verb + ") (NP (DT the) (NN " + thing +
             ")) (PP (P to) (NP " + recipient + "))))";
      recipient_pos = 5;
    } else {  // giver verb recipient the thing
      arg1 = "(S (NP " + giver + ") (VP (V " + verb + ") (NP " + recipient +
             ") (NP (DT the) (NN " + thing + "))))";
      recipient_pos = 2;
    }
    const std::string arg2 = "(S (NP " + pronoun + ") (VP (V was) (ADJ " + state + ")))";

    for (int member = 0; member < 2; ++member) {
      Instance inst;
      inst.id = "synth-" + std::to_string(p) + (member == 0 ? "-a" : "-b");
      inst.arg_m_text = {arg1};
      inst.arg_n_text = {arg2};
      inst.arg_m_raw = {parse_bracketed_tree(arg1)};
      inst.arg_n_raw = {parse_bracketed_tree(arg2)};
      inst.arg_m = binarize(inst.arg_m_raw.front());
      inst.arg_n = binarize(inst.arg_n_raw.front());
      inst.mentions = {{Side::M, 0, 1},
                       {Side::M, recipient_pos, recipient_pos + 1},
                       {Side::N, 0, 1}};
      for (const auto& m : inst.mentions)
        inst.mention_nodes.push_back(resolve_mention_node(inst.tree(m.side), m.begin, m.end));
      inst.chains = {{member == 0 ? std::size_t{0} : std::size_t{1}, 2}};
      inst.labels = {member == 0 ? spec.subject_label : spec.object_label};
      inst.split = "train";
      inst.alignment = build_alignments(inst, AlignmentPolicy::AllPairs);
      out.data.instances.push_back(std::move(inst));
    }
  }

  std::vector<std::string> vocab;
  for (const auto* list : {&kNames, &kVerbs, &kThings, &kPronouns, &kStates})
    vocab.insert(vocab.end(), list->begin(), list->end());
  for (const char* w : {"the", "to", "was"}) vocab.emplace_back(w);
  RowMatrix m(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(spec.dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  out.embeddings = standardize(WordEmbeddings(std::move(vocab), std::move(m)));
  return out;
}

}  // namespace updown
