#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "updown/features.hpp"
#include "updown/rng.hpp"

using namespace updown;
using updown::testing::error_code_of;

namespace {

Instance make_instance(const std::string& m, const std::string& n,
                       const std::string& label = "A") {
  const std::string json = R"({"id":"t","arg1_trees":[")" + m + R"("],"arg2_trees":[")" + n +
                           R"("],"mentions":[],"chains":[],"labels":[")" + label + R"("]})";
  return parse_instance(json, AlignmentPolicy::AllPairs);
}

// Joint-table MI: sum_x sum_y p(x,y) ln(p(x,y) / (p(x) p(y))).
double brute_mi(const std::vector<bool>& present, const std::vector<std::size_t>& labels,
                std::size_t num_labels) {
  const double n = static_cast<double>(present.size());
  std::vector<std::array<double, 2>> joint(num_labels, {0.0, 0.0});
  for (std::size_t i = 0; i < present.size(); ++i) joint[labels[i]][present[i] ? 1 : 0] += 1;
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    double px = 0.0;
    for (const auto& row : joint) px += row[static_cast<std::size_t>(x)] / n;
    for (const auto& row : joint) {
      const double pxy = row[static_cast<std::size_t>(x)] / n;
      const double py = (row[0] + row[1]) / n;
      if (pxy > 0) mi += pxy * std::log(pxy / (px * py));
    }
  }
  return mi;
}

void collect_productions(const RawTree& t, std::set<std::string>& out) {
  if (t.is_leaf()) return;
  std::string p = t.label + "→";
  for (std::size_t i = 0; i < t.children.size(); ++i)
    p += (i ? " " : "") + (t.children[i].is_leaf() ? t.children[i].token : t.children[i].label);
  out.insert(p);
  for (const auto& c : t.children) collect_productions(c, out);
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("lexical pairs") {
  CHECK(extract_lexical_pairs(make_instance("(S a)", "(S b)")) == SparseCounts{{"lex:a|b", 1}});
  CHECK(extract_lexical_pairs(make_instance("(S a a)", "(S b)")) == SparseCounts{{"lex:a|b", 1}});
  const SparseCounts six = extract_lexical_pairs(make_instance("(S a b c)", "(S D e)"));
  CHECK(six.size() == 6);
  for (const char* m : {"a", "b", "c"})
    for (const char* n : {"d", "e"}) CHECK(six.count(std::string("lex:") + m + "|" + n) == 1);
}

TEST_CASE("productions") {
  const SparseCounts p = extract_productions(make_instance("(S (NP x) (VP y))", "(T z)"));
  CHECK(p.count("prod:m:S→NP VP") == 1);
  CHECK(p.count("prod:both:S→NP VP") == 0);

  const SparseCounts both = extract_productions(make_instance("(S (NP x) (VP y))", "(S (NP u) (VP w))"));
  CHECK(both.count("prod:both:S→NP VP") == 1);

  const std::string tree = "(S (NP (DT the) (NN cat)) (VP (V sat) (PP (P on) (NP (DT a) (NN mat)))))";
  std::set<std::string> oracle;
  collect_productions(parse_bracketed_tree(tree), oracle);
  const SparseCounts keys = extract_productions(make_instance(tree, "(X q)"));
  std::size_t m_keys = 0;
  for (const auto& [k, v] : keys) m_keys += k.rfind("prod:m:", 0) == 0;
  CHECK(m_keys == oracle.size());
}

TEST_CASE("mutual information") {
  const std::vector<std::size_t> labels{0, 0, 1, 1};
  CHECK(mutual_information(std::vector<bool>{1, 1, 1, 1}, labels, 2) == doctest::Approx(0.0));
  CHECK(mutual_information(std::vector<bool>{1, 1, 0, 0}, labels, 2) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));

  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.below(20), k = 2 + rng.below(3);
    std::vector<bool> present(n);
    std::vector<std::size_t> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      present[i] = rng.uniform() < 0.4;
      ys[i] = i < k ? i : rng.below(k);
    }
    CHECK(std::abs(mutual_information(present, ys, k) - brute_mi(present, ys, k)) <= 1e-12);
  }

  const std::vector<std::size_t> one_label{0, 0, 0};
  CHECK(error_code_of([&] { mutual_information(std::vector<bool>{1, 0, 1}, one_label, 2); }) ==
        ErrorCode::DegenerateCorpus);
}

TEST_CASE("selection against a brute-force sort") {
  Rng rng(2);
  const std::size_t n = 40, k = 3;
  std::vector<SparseCounts> entries(n);
  std::vector<std::size_t> ys(n);
  std::vector<std::string> keys;
  for (int f = 0; f < 30; ++f) keys.push_back("lex:f" + std::to_string(f));
  for (int f = 0; f < 8; ++f) keys.push_back("prod:m:P" + std::to_string(f));
  for (std::size_t i = 0; i < n; ++i) {
    ys[i] = i % k;
    for (const auto& key : keys)
      if (rng.uniform() < 0.3) entries[i][key] = 1;
    // Twin features with identical columns force exact MI ties.
    if (entries[i].count("lex:f0")) entries[i]["lex:twin"] = 1;
  }
  keys.push_back("lex:twin");
  const std::vector<CategoryBudget> budgets{{"lex", 10}, {"prod", 100}};
  const FeatureMap map = select_features(entries, ys, k, budgets);

  std::vector<std::string> expect;
  for (const auto& b : budgets) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& key : keys) {
      if (key.rfind(b.category + ":", 0) != 0) continue;
      std::vector<bool> present(n);
      for (std::size_t i = 0; i < n; ++i) present[i] = entries[i].count(key) > 0;
      ranked.emplace_back(std::round(brute_mi(present, ys, k) * 1e12), key);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < std::min(b.budget, ranked.size()); ++i)
      expect.push_back(ranked[i].second);
  }
  CHECK(map.keys() == expect);
  CHECK(map.shortfall.at("lex") == 0);
  CHECK(map.shortfall.at("prod") == 92);
}

TEST_CASE("budgets") {
  std::vector<SparseCounts> entries(4);
  entries[0] = {{"lex:a", 1}, {"lex:b", 1}};
  entries[1] = {{"lex:a", 1}, {"lex:c", 1}};
  entries[2] = {{"lex:c", 1}};
  entries[3] = {{"lex:b", 1}, {"lex:c", 1}};
  const std::vector<std::size_t> ys{0, 0, 1, 1};
  const std::vector<CategoryBudget> two{{"lex", 2}};
  const FeatureMap map = select_features(entries, ys, 2, two);
  // a: perfect predictor; b: independent; c: partial.
  CHECK(map.keys() == std::vector<std::string>{"lex:a", "lex:c"});

  const auto defaults = default_budgets();
  REQUIRE(defaults.size() == 2);
  CHECK(defaults[0].budget == 500);
  CHECK(defaults[1].budget == 100);

  std::vector<SparseCounts> forty(4);
  for (int f = 0; f < 40; ++f) forty[static_cast<std::size_t>(f % 4)]["lex:k" + std::to_string(f)] = 1;
  const std::vector<CategoryBudget> lex500{{"lex", 500}};
  const FeatureMap all = select_features(forty, ys, 2, lex500);
  CHECK(all.size() == 40);
  CHECK(all.shortfall.at("lex") == 460);
}

TEST_CASE("vectorization") {
  std::vector<FeatureMap::Entry> entries;
  for (int i = 0; i < 5; ++i) entries.push_back({"lex:k" + std::to_string(i), 0.1, {}});
  const FeatureMap map(entries);
  CHECK(vectorize(SparseCounts{{"lex:zz", 1}}, map).isZero());
  const Vector e3 = vectorize(SparseCounts{{"lex:k3", 1}}, map);
  CHECK(e3 == Vector::Unit(5, 3));

  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    SparseCounts c;
    for (int i = 0; i < 10; ++i)
      if (rng.uniform() < 0.5) c["lex:k" + std::to_string(i)] = 1;
    const Vector v = vectorize(c, map);
    for (std::size_t j = 0; j < map.size(); ++j)
      CHECK((v(static_cast<Eigen::Index>(j)) != 0.0) == (c.count(map.keys()[j]) > 0));
  }
}

TEST_CASE("audit file") {
  const FeatureMap map({{"lex:a|b", 0.25, {}}, {"prod:m:S→NP VP", 0.125, {}}});
  std::ostringstream out;
  map.write(out);
  CHECK(out.str().find("0\tlex:a|b\t") == 0);
  CHECK(out.str().find("1\tprod:m:S→NP VP\t") != std::string::npos);
  CHECK(map.hash() != FeatureMap({{"lex:a|b", 0.25, {}}}).hash());
}

}  // TEST_SUITE
