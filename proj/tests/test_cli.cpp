#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "updown/cli.hpp"
#include "updown/evaluation.hpp"
#include "updown/model.hpp"

using namespace updown;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "updown");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"train"}).code == 2);
  CHECK(cli({"eval", "--protocol", "weird", "--model", "m", "--embeddings", "e", "--data", "d"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("gradcheck prints its summary") {
  const Run r = cli({"gradcheck", "--K", "5", "--trials", "25", "--seed", "123"});
  CHECK(r.code == 0);
  CHECK(r.out.find("max_rel_err\t") != std::string::npos);
}

TEST_CASE("synth, train, predict and eval") {
  const auto dir = updown::testing::tmp_dir("cli");
  const std::string data = (dir / "d.jsonl").string();
  const std::string emb = (dir / "e.txt").string();
  const std::string model = (dir / "m.txt").string();
  REQUIRE(cli({"synth", "--pairs", "10", "--K", "4", "--data-out", data, "--embeddings-out", emb}).code == 0);
  const Run t = cli({"train", "--data", data, "--embeddings", emb, "--model-out", model,
                     "--mode", "full", "--epochs", "3", "--feature-map-out",
                     (dir / "fmap.tsv").string()});
  REQUIRE(t.code == 0);
  CHECK(t.out.find("3\t") != std::string::npos);
  CHECK_FALSE(slurp(dir / "fmap.tsv").empty());

  const Run p = cli({"predict", "--model", model, "--embeddings", emb, "--data", data});
  CHECK(p.code == 0);
  CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 20);

  const Run e = cli({"eval", "--model", model, "--embeddings", emb, "--data", data});
  REQUIRE(e.code == 0);
  const Model m = load_model(model);
  const WordEmbeddings we = load_embeddings(emb);
  const Dataset d = load_dataset(data);
  CHECK(e.out == eval_multiclass(m, we, d).to_text());

  std::ofstream(dir / "empty.jsonl").close();
  const Run empty = cli({"predict", "--model", model, "--embeddings", emb, "--data",
                         (dir / "empty.jsonl").string()});
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());

  const Run coref = cli({"eval", "--model", model, "--embeddings", emb, "--data", data,
                         "--protocol", "coref"});
  CHECK(coref.code == 0);
  CHECK(coref.out.find("shared") != std::string::npos);
}

TEST_CASE("domain errors exit 1 with context") {
  const auto dir = updown::testing::tmp_dir("cli_err");
  std::ofstream(dir / "bad.jsonl") << "{\"id\":\"a\"}\n";
  const Run r = cli({"prepare", "--input", (dir / "bad.jsonl").string(), "--output",
                     (dir / "out.jsonl").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.jsonl:1") != std::string::npos);

  const Run missing = cli({"predict", "--model", (dir / "nope").string(), "--embeddings", "x",
                           "--data", "y"});
  CHECK(missing.code == 1);
}

TEST_CASE("prepare applies presets and maps numbers") {
  const auto dir = updown::testing::tmp_dir("cli_prep");
  std::ofstream(dir / "raw.jsonl")
      << R"J({"id":"1","arg1_trees":["(S (NP it) (VP cost (NP 1,000)))"],"arg2_trees":["(S x)"],"mentions":[],"chains":[],"labels":["EntRel"]})J"
      << "\n"
      << R"J({"id":"2","arg1_trees":["(S a)"],"arg2_trees":["(S b)"],"mentions":[],"chains":[],"labels":["NoRel"]})J"
      << "\n";
  std::ofstream(dir / "vec.txt") << "a 1 2\nb 3 5\n<num> 0 0\n";
  const Run r = cli({"prepare", "--input", (dir / "raw.jsonl").string(), "--output",
                     (dir / "prep.jsonl").string(), "--preset", "binary4", "--map-numbers",
                     "--embeddings", (dir / "vec.txt").string(), "--embeddings-out",
                     (dir / "std.txt").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("instances\t1") != std::string::npos);
  CHECK(r.out.find("dropped\t1") != std::string::npos);
  const std::string prepared = slurp(dir / "prep.jsonl");
  CHECK(prepared.find("<num>") != std::string::npos);
  CHECK(prepared.find("\"Expansion\"") != std::string::npos);
  const WordEmbeddings std_emb = load_embeddings((dir / "std.txt").string());
  CHECK(std::abs(std_emb.matrix().col(0).mean()) < 1e-12);
}

}  // TEST_SUITE
