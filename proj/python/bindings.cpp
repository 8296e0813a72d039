#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>
#include <sstream>

#include "updown/cli.hpp"
#include "updown/error.hpp"
#include "updown/evaluation.hpp"
#include "updown/gradcheck.hpp"
#include "updown/training.hpp"

namespace py = pybind11;
using namespace updown;

namespace {

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["protocol"] = r.protocol;
  d["instances"] = r.instances;
  d["accuracy"] = r.accuracy;
  if (r.protocol == "binary") {
    d["positive"] = r.positive;
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    d["tn"] = r.tn;
    d["precision"] = r.precision;
    d["recall"] = r.recall;
    d["f1"] = r.f1;
  }
  py::list subsets;
  for (const auto& s : r.subsets) {
    py::dict sd;
    sd["name"] = s.name;
    sd["count"] = s.count;
    sd["proportion"] = s.proportion;
    sd["accuracy"] = s.accuracy;
    subsets.append(sd);
  }
  d["subsets"] = subsets;
  d["fingerprint"] = r.fingerprint;
  d["text"] = r.to_text();
  return d;
}

AlignmentPolicy policy_of(const std::string& s) {
  if (s == "all-pairs") return AlignmentPolicy::AllPairs;
  if (s == "first-pair") return AlignmentPolicy::FirstPair;
  throw py::value_error("policy must be 'all-pairs' or 'first-pair'");
}

}  // namespace

PYBIND11_MODULE(_updown, m) {
  m.doc() = "Up-down tree composition for implicit discourse relations";

  py::register_exception<updown::Error>(m, "UpdownError", PyExc_RuntimeError);

  m.def("binarize", [](const std::string& text) {
    return to_bracketed(binarize(parse_bracketed_tree(text)));
  }, py::arg("tree"), "Right-branching binarization of a bracketed tree.");

  py::class_<WordEmbeddings>(m, "Embeddings")
      .def(py::init([](std::vector<std::string> tokens, RowMatrix matrix) {
             if (tokens.size() != static_cast<std::size_t>(matrix.rows()))
               throw py::value_error("one row per token expected");
             return WordEmbeddings(std::move(tokens), std::move(matrix));
           }),
           py::arg("tokens"), py::arg("matrix"))
      .def_property_readonly("dim", &WordEmbeddings::dim)
      .def_property_readonly("tokens", &WordEmbeddings::tokens)
      .def_property_readonly("matrix", &WordEmbeddings::matrix)
      .def("__len__", &WordEmbeddings::vocab_size)
      .def("lookup", &WordEmbeddings::lookup)
      .def("save", [](const WordEmbeddings& e, const std::string& path) { save_embeddings(path, e); });
  m.def("load_embeddings", [](const std::string& path) { return load_embeddings(path); });
  m.def("standardize", &standardize);

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", [](const Dataset& d) { return d.instances.size(); })
      .def_readonly("labels", &Dataset::labels)
      .def_property_readonly("gold", [](const Dataset& d) {
        std::vector<std::vector<std::string>> out;
        for (const auto& i : d.instances) out.push_back(i.labels);
        return out;
      })
      .def("save", [](const Dataset& d, const std::string& path) {
        std::ofstream out(path);
        write_dataset(out, d);
      });
  m.def("load_dataset", [](const std::string& path, const std::string& policy) {
    return load_dataset(path, policy_of(policy));
  }, py::arg("path"), py::arg("policy") = "all-pairs");

  m.def("synth_generate", [](std::size_t pairs, std::size_t dim, std::uint64_t seed) {
    SynthSpec spec;
    spec.pairs = pairs;
    spec.dim = dim;
    spec.seed = seed;
    SynthCorpus c = synth_generate(spec);
    return py::make_tuple(std::move(c.data), std::move(c.embeddings));
  }, py::arg("pairs") = 200, py::arg("dim") = 20, py::arg("seed") = 7);

  py::class_<Model>(m, "Model")
      .def_property_readonly("mode", [](const Model& mo) { return std::string(to_string(mo.mode)); })
      .def_readonly("labels", &Model::labels)
      .def_property_readonly("dim", &Model::dim)
      .def_property_readonly("up", [](const Model& mo) { return mo.params.composition.up; })
      .def_property_readonly("down", [](const Model& mo) { return mo.params.composition.down; })
      .def("fingerprint", &model_fingerprint)
      .def("scores", [](const Model& mo, const WordEmbeddings& e, const Dataset& d) {
        Matrix out(static_cast<Eigen::Index>(d.instances.size()),
                   static_cast<Eigen::Index>(mo.labels.size()));
        for (std::size_t i = 0; i < d.instances.size(); ++i)
          out.row(static_cast<Eigen::Index>(i)) = decision_scores(mo, e, d.instances[i]).transpose();
        return out;
      })
      .def("predict", &predict_labels)
      .def("save", [](const Model& mo, const std::string& path) { save_model(path, mo); });
  m.def("load_model", &load_model);

  m.def("_train", [](const Dataset& d, const WordEmbeddings& e, const std::string& config_json) {
    const TrainConfig cfg = config_from_json(nlohmann::json::parse(config_json));
    std::optional<FeatureMap> fmap;
    if (uses_features(cfg.mode)) fmap = select_features(d, cfg.budgets);
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train(d, e, cfg, fmap ? &*fmap : nullptr);
    }
    py::list log;
    for (const auto& l : r.log) log.append(py::make_tuple(l.epoch, l.mean_objective, l.train_accuracy));
    return py::make_tuple(std::move(r.model), log);
  });

  m.def("eval_multiclass", [](const Model& mo, const WordEmbeddings& e, const Dataset& d) {
    return report_dict(eval_multiclass(mo, e, d));
  });
  m.def("eval_binary", [](const Model& mo, const WordEmbeddings& e, const Dataset& d,
                          const std::string& positive) {
    return report_dict(eval_binary(mo, e, d, positive));
  });
  m.def("coref_subset_report", [](const Model& mo, const WordEmbeddings& e, const Dataset& d) {
    return report_dict(coref_subset_report(mo, e, d));
  });

  m.def("gradcheck", [](std::vector<std::size_t> dims, std::size_t trials, std::uint64_t seed) {
    GradcheckOptions o;
    o.dims = std::move(dims);
    o.trials = trials;
    o.seed = seed;
    GradcheckReport r;
    {
      py::gil_scoped_release release;
      r = run_gradcheck(o);
    }
    py::dict d;
    d["max_rel_err"] = r.max_rel_err;
    d["passed"] = r.passed;
    d["seconds"] = r.seconds;
    return d;
  }, py::arg("dims") = std::vector<std::size_t>{2, 5, 10}, py::arg("trials") = 25,
     py::arg("seed") = 1);

  m.def("param_count", [](std::size_t labels, std::size_t k, std::size_t f) {
    const ParamCounts c = param_count(labels, k, f);
    py::dict d;
    d["bilinear"] = c.bilinear;
    d["full_rank"] = c.full_rank;
    d["features"] = c.features;
    d["biases"] = c.biases;
    return d;
  }, py::arg("labels"), py::arg("k"), py::arg("features") = 0);

  m.def("compose", [](const std::string& tree, const WordEmbeddings& e, const Matrix& up,
                      const Matrix& down) {
    const BinaryTree t = binarize(parse_bracketed_tree(tree));
    const CompositionParams p{up, down};
    if (up.rows() != static_cast<Eigen::Index>(e.dim()) || up.cols() != 2 * up.rows() ||
        down.rows() != up.rows() || down.cols() != up.cols())
      throw py::value_error("U and D must both be K x 2K with K the embedding dimension");
    const NodeStates s = downward_pass(t, upward_pass(t, e, p), p);
    Matrix u(static_cast<Eigen::Index>(t.size()), up.rows());
    Matrix d(static_cast<Eigen::Index>(t.size()), up.rows());
    for (std::size_t i = 0; i < t.size(); ++i) {
      u.row(static_cast<Eigen::Index>(i)) = s.up[i].transpose();
      d.row(static_cast<Eigen::Index>(i)) = s.down[i].transpose();
    }
    return py::make_tuple(u, d, s.visits);
  }, py::arg("tree"), py::arg("embeddings"), py::arg("U"), py::arg("D"),
     "Upward and downward states per node (children before parents).");

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "updown");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
