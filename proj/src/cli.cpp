#include "updown/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "updown/error.hpp"
#include "updown/evaluation.hpp"
#include "updown/gradcheck.hpp"
#include "updown/training.hpp"

namespace updown {

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> dim;
  std::string policy = "all-pairs";
};

AlignmentPolicy parse_policy(const std::string& s) {
  return s == "first-pair" ? AlignmentPolicy::FirstPair : AlignmentPolicy::AllPairs;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--mode", c.mode, "Model mode")
      ->check(CLI::IsMember({"surface", "additive", "upward", "upward+features",
                             "upward+downward", "full"}));
  cmd->add_option("--K", c.dim, "Latent dimension");
  cmd->add_option("--policy", c.policy, "Mention alignment policy")
      ->check(CLI::IsMember({"all-pairs", "first-pair"}));
}

TrainConfig load_config(const std::string& path, const Common& c) {
  TrainConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedInstance, path + ": " + e.what());
    }
    cfg = config_from_json(j);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.mode) cfg.mode = parse_mode(*c.mode);
  if (c.dim) cfg.dim = *c.dim;
  return cfg;
}

std::unique_ptr<std::ostream> open_out(const std::string& path) {
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw Error(ErrorCode::Io, "cannot write " + path);
  return f;
}

// Writes to `path`, or to `fallback` when path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  *open_out(path) << text;
}

void map_numeric_leaves(RawTree& t) {
  if (t.is_leaf()) {
    if (is_numeric_token(t.token)) t.token = std::string(kNumberToken);
    return;
  }
  for (auto& c : t.children) map_numeric_leaves(c);
}

std::string positive_for(const Model& model, const std::string& requested) {
  if (!requested.empty()) return requested;
  if (model.labels.size() == 2 && model.labels[1] == kOtherLabel) return model.labels[0];
  throw Error(ErrorCode::LabelMismatch, "binary protocol needs --positive");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity-augmented up-down composition for discourse relations", "updown"};
  app.require_subcommand(1);

  // prepare
  Common prep_c;
  std::string prep_in, prep_out, prep_emb, prep_emb_out, prep_preset = "none";
  bool prep_numbers = false;
  auto* prepare = app.add_subcommand("prepare", "Validate instances, apply a label preset, standardize embeddings");
  prepare->add_option("--input", prep_in, "Raw instance file (JSONL)")->required();
  prepare->add_option("--output", prep_out, "Prepared instance file")->required();
  prepare->add_option("--embeddings", prep_emb, "Word vectors (text format)");
  prepare->add_option("--embeddings-out", prep_emb_out, "Standardized word vectors");
  prepare->add_option("--preset", prep_preset, "Label preset")
      ->check(CLI::IsMember({"none", "multiclass11", "binary4"}));
  prepare->add_flag("--map-numbers", prep_numbers, "Replace numeric tokens with <num>");
  add_common(prepare, prep_c);

  // train
  Common train_c;
  std::string train_cfg, train_data, train_emb, train_model, train_log, train_fmap, train_pos;
  std::optional<std::size_t> train_epochs;
  auto* trainc = app.add_subcommand("train", "Train a model");
  trainc->add_option("--config", train_cfg, "JSON training configuration");
  trainc->add_option("--data", train_data, "Prepared instance file")->required();
  trainc->add_option("--embeddings", train_emb, "Word vectors")->required();
  trainc->add_option("--model-out", train_model, "Model output path")->required();
  trainc->add_option("--log-out", train_log, "Per-epoch log (default: stdout)");
  trainc->add_option("--feature-map-out", train_fmap, "Selected feature audit file");
  trainc->add_option("--positive", train_pos, "Train one-vs-rest for this label, with class resampling");
  trainc->add_option("--epochs", train_epochs, "Override epoch count");
  add_common(trainc, train_c);

  // predict
  Common pred_c;
  std::string pred_model, pred_emb, pred_data, pred_out;
  auto* predictc = app.add_subcommand("predict", "Predict one label per instance");
  predictc->add_option("--model", pred_model, "Model file")->required();
  predictc->add_option("--embeddings", pred_emb, "Word vectors")->required();
  predictc->add_option("--data", pred_data, "Instance file")->required();
  predictc->add_option("--output", pred_out, "Output path (default: stdout)");
  add_common(predictc, pred_c);

  // eval
  Common eval_c;
  std::string eval_model, eval_emb, eval_data, eval_out, eval_protocol = "multiclass", eval_pos;
  auto* evalc = app.add_subcommand("eval", "Evaluate a model");
  evalc->add_option("--model", eval_model, "Model file")->required();
  evalc->add_option("--embeddings", eval_emb, "Word vectors")->required();
  evalc->add_option("--data", eval_data, "Instance file")->required();
  evalc->add_option("--protocol", eval_protocol, "multiclass | binary | coref")
      ->check(CLI::IsMember({"multiclass", "binary", "coref"}));
  evalc->add_option("--positive", eval_pos, "Positive label for the binary protocol");
  evalc->add_option("--output", eval_out, "Report path (default: stdout)");
  add_common(evalc, eval_c);

  // gradcheck
  Common gc_c;
  std::vector<std::size_t> gc_dims;
  std::size_t gc_trials = 25;
  double gc_h = 1e-6, gc_tol = 1e-4;
  auto* gradc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gradc->add_option("--dims", gc_dims, "Latent dimensions (default 2 5 10)");
  gradc->add_option("--trials", gc_trials, "Random instances per mode and K");
  gradc->add_option("--step", gc_h, "Finite-difference step");
  gradc->add_option("--tol", gc_tol, "Maximum relative error");
  add_common(gradc, gc_c);

  // synth
  Common syn_c;
  SynthSpec syn;
  std::string syn_data, syn_emb;
  auto* synthc = app.add_subcommand("synth", "Generate a synthetic entity-discrimination corpus");
  synthc->add_option("--pairs", syn.pairs, "Instance pairs");
  synthc->add_option("--data-out", syn_data, "Instance file")->required();
  synthc->add_option("--embeddings-out", syn_emb, "Embedding file")->required();
  add_common(synthc, syn_c);

  // grid
  Common grid_c;
  std::string grid_cfg, grid_data, grid_emb, grid_table, grid_best, grid_obj = "accuracy", grid_pos;
  GridSpec grid_spec;
  bool grid_resample = false;
  std::optional<std::size_t> grid_epochs;
  auto* gridc = app.add_subcommand("grid", "Grid search over K, lambda and eta on a dev split");
  gridc->add_option("--config", grid_cfg, "Base JSON configuration");
  gridc->add_option("--data", grid_data, "Prepared instance file")->required();
  gridc->add_option("--embeddings", grid_emb, "Word vectors; '{K}' is replaced by each K")->required();
  gridc->add_option("--dims", grid_spec.dims, "K grid");
  gridc->add_option("--lambdas", grid_spec.lambdas, "lambda grid");
  gridc->add_option("--etas", grid_spec.etas, "eta grid");
  gridc->add_option("--objective", grid_obj, "accuracy | f1")
      ->check(CLI::IsMember({"accuracy", "f1"}));
  gridc->add_option("--positive", grid_pos, "Positive label (one-vs-rest, F1)");
  gridc->add_flag("--resample", grid_resample, "Balance classes in the training split");
  gridc->add_option("--table-out", grid_table, "Score table (default: stdout)");
  gridc->add_option("--best-out", grid_best, "Best configuration as JSON");
  gridc->add_option("--epochs", grid_epochs, "Override epoch count");
  add_common(gridc, grid_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*prepare) {
      Dataset data = load_dataset(prep_in, parse_policy(prep_c.policy));
      if (prep_numbers) {
        for (auto& inst : data.instances) {
          for (auto* side : {&inst.arg_m_raw, &inst.arg_n_raw})
            for (auto& t : *side) map_numeric_leaves(t);
          inst.arg_m_text.clear();
          inst.arg_n_text.clear();
          for (const auto& t : inst.arg_m_raw) inst.arg_m_text.push_back(to_bracketed(t));
          for (const auto& t : inst.arg_n_raw) inst.arg_n_text.push_back(to_bracketed(t));
        }
      }
      const Dataset prepared = apply_preset(data, parse_label_preset(prep_preset));
      {
        auto f = open_out(prep_out);
        write_dataset(*f, prepared);
      }
      std::size_t shared = 0;
      for (const auto& inst : prepared.instances) shared += inst.has_shared_entities();
      out << "instances\t" << prepared.instances.size() << '\n'
          << "dropped\t" << data.instances.size() - prepared.instances.size() << '\n'
          << "shared_entities\t" << shared << '\n';
      if (!prep_emb.empty()) {
        const WordEmbeddings emb = standardize(load_embeddings(prep_emb, prep_c.dim));
        if (!prep_emb_out.empty()) save_embeddings(prep_emb_out, emb);
        out << "vocabulary\t" << emb.vocab_size() << '\n'
            << "dimension\t" << emb.dim() << '\n'
            << "duplicates\t" << emb.duplicate_count() << '\n'
            << "zero_variance_dims\t" << emb.zero_variance_dims().size() << '\n';
      }
      return 0;
    }

    if (*trainc) {
      TrainConfig cfg = load_config(train_cfg, train_c);
      if (train_epochs) cfg.epochs = *train_epochs;
      Dataset data = load_dataset(train_data, parse_policy(train_c.policy));
      const WordEmbeddings emb = load_embeddings(train_emb);
      if (!train_c.dim && cfg.mode != ModelMode::SurfaceOnly) cfg.dim = emb.dim();
      if (!train_pos.empty()) {
        data = one_vs_rest(data, train_pos);
        data = resample_balanced(data, train_pos, cfg.seed);
      }
      std::optional<FeatureMap> fmap;
      if (uses_features(cfg.mode)) {
        fmap = select_features(data, cfg.budgets);
        if (!train_fmap.empty()) fmap->write(*open_out(train_fmap));
      }
      const TrainResult result = train(data, emb, cfg, fmap ? &*fmap : nullptr);
      save_model(train_model, result.model);
      emit(train_log, out, format_log(result.log));
      return 0;
    }

    if (*predictc) {
      const Model model = load_model(pred_model);
      const WordEmbeddings emb = load_embeddings(pred_emb);
      const Dataset data = load_dataset(pred_data, parse_policy(pred_c.policy));
      std::string text;
      for (const auto& label : predict_labels(model, emb, data)) text += label + "\n";
      emit(pred_out, out, text);
      return 0;
    }

    if (*evalc) {
      const Model model = load_model(eval_model);
      const WordEmbeddings emb = load_embeddings(eval_emb);
      Dataset data = load_dataset(eval_data, parse_policy(eval_c.policy));
      EvalReport report;
      if (eval_protocol == "binary") {
        report = eval_binary(model, emb, data, positive_for(model, eval_pos));
      } else if (eval_protocol == "coref") {
        report = coref_subset_report(model, emb, data);
      } else {
        report = eval_multiclass(model, emb, data);
      }
      emit(eval_out, out, report.to_text());
      return 0;
    }

    if (*gradc) {
      GradcheckOptions opt;
      if (!gc_dims.empty()) opt.dims = gc_dims;
      if (gc_c.dim) opt.dims = {*gc_c.dim};
      if (gc_c.mode) opt.modes = {parse_mode(*gc_c.mode)};
      if (gc_c.seed) opt.seed = *gc_c.seed;
      opt.trials = gc_trials;
      opt.h = gc_h;
      opt.tolerance = gc_tol;
      const GradcheckReport report = run_gradcheck(opt);
      out << report.to_text();
      return report.passed ? 0 : 1;
    }

    if (*synthc) {
      if (syn_c.seed) syn.seed = *syn_c.seed;
      if (syn_c.dim) syn.dim = *syn_c.dim;
      const SynthCorpus corpus = synth_generate(syn);
      {
        auto f = open_out(syn_data);
        write_dataset(*f, corpus.data);
      }
      save_embeddings(syn_emb, corpus.embeddings);
      out << "instances\t" << corpus.data.instances.size() << '\n'
          << "vocabulary\t" << corpus.embeddings.vocab_size() << '\n';
      return 0;
    }

    if (*gridc) {
      TrainConfig base = load_config(grid_cfg, grid_c);
      if (grid_epochs) base.epochs = *grid_epochs;
      if (grid_c.dim) grid_spec.dims = {*grid_c.dim};
      Dataset data = load_dataset(grid_data, parse_policy(grid_c.policy));
      if (!grid_pos.empty()) data = one_vs_rest(data, grid_pos);
      std::map<std::size_t, WordEmbeddings> cache;
      const EmbeddingProvider provider = [&](std::size_t k) -> const WordEmbeddings& {
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        std::string path = grid_emb;
        if (const auto pos = path.find("{K}"); pos != std::string::npos)
          path.replace(pos, 3, std::to_string(k));
        return cache.emplace(k, load_embeddings(path, k)).first->second;
      };
      GridOptions opt;
      opt.objective = grid_obj == "f1" ? GridObjective::F1 : GridObjective::Accuracy;
      opt.positive = grid_pos;
      opt.resample = grid_resample;
      const GridResult result = grid_search(data, provider, base, grid_spec, opt);
      emit(grid_table, out, format_grid(result));
      const std::string best = to_json(result.best).dump(2) + "\n";
      emit(grid_best, out, best);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace updown
