#include <doctest.h>

#include <functional>
#include <map>
#include <set>

#include "helpers.hpp"
#include "updown/rng.hpp"
#include "updown/tree.hpp"

using namespace updown;
using updown::testing::error_code_of;

namespace {

// Arity histogram and leaf sequence of an n-ary tree, by plain recursion.
void census(const RawTree& t, std::map<std::size_t, std::size_t>& arity,
            std::vector<std::string>& leaves) {
  if (t.is_leaf()) {
    leaves.push_back(t.token);
    return;
  }
  ++arity[t.children.size()];
  for (const auto& c : t.children) census(c, arity, leaves);
}

std::size_t right_spine_depth(const BinaryTree& t) {
  std::size_t depth = 0;
  for (NodeId id = t.root(); !t.is_leaf(id); id = t.right(id)) ++depth;
  return depth;
}

}  // namespace

TEST_SUITE("tree") {

TEST_CASE("bracketed reader") {
  const RawTree t = parse_bracketed_tree("(S (NP she) (VP (V was) (ADJ hungry)))");
  CHECK(t.label == "S");
  CHECK(t.tokens() == std::vector<std::string>{"she", "was", "hungry"});
  CHECK(t.leaf_count() == 3);

  const RawTree single = parse_bracketed_tree("(X tok)");
  CHECK(single.leaf_count() == 1);
  CHECK(binarize(single).size() == 1);
  CHECK(binarize(single).node(0).label == "X");
}

TEST_CASE("bracketed reader errors carry the offset") {
  const std::string text = "(S (NP she) (VP was hungry";
  try {
    parse_bracketed_tree(text);
    FAIL("expected UnbalancedBrackets");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnbalancedBrackets);
    REQUIRE(e.position().has_value());
    CHECK(*e.position() == text.size());
  }
  CHECK(error_code_of([] { parse_bracketed_tree(""); }) == ErrorCode::EmptyTree);
  CHECK(error_code_of([] { parse_bracketed_tree("(S)"); }) == ErrorCode::EmptyTree);
  CHECK(error_code_of([] { parse_bracketed_tree("(S a))"); }) == ErrorCode::UnbalancedBrackets);
}

TEST_CASE("right branching binarization") {
  const BinaryTree b = binarize(parse_bracketed_tree("(A b c d)"));
  CHECK(to_bracketed(b) == "(A b (A| c d))");
  b.validate();

  const RawTree binary = parse_bracketed_tree("(S (NP a b) (VP c d))");
  CHECK(to_bracketed(binarize(binary)) == "(S (NP a b) (VP c d))");

  const BinaryTree four = binarize(parse_bracketed_tree("(A a b c d)"));
  CHECK(right_spine_depth(four) == 3);
  CHECK(four.leaf_count() == 4);
}

TEST_CASE("unary chains collapse") {
  const BinaryTree b = binarize(parse_bracketed_tree("(ROOT (S (NP (NN dog)) (VP barks)))"));
  CHECK(to_bracketed(b) == "(S dog barks)");
  CHECK(b.node(b.leaves()[0]).label == "NN");
}

TEST_CASE("binarization preserves leaves on random trees") {
  Rng rng(11);
  std::function<RawTree(int)> grow = [&](int depth) {
    RawTree t;
    if (depth == 0 || rng.uniform() < 0.3) {
      t.token = "w" + std::to_string(rng.below(50));
      return t;
    }
    t.label = "N" + std::to_string(rng.below(4));
    const auto k = 1 + rng.below(5);
    for (std::uint64_t i = 0; i < k; ++i) t.children.push_back(grow(depth - 1));
    return t;
  };
  for (int trial = 0; trial < 200; ++trial) {
    RawTree raw;
    raw.label = "TOP";
    raw.children = {grow(4), grow(4)};
    std::map<std::size_t, std::size_t> arity;
    std::vector<std::string> leaves;
    census(raw, arity, leaves);

    const BinaryTree b = binarize(raw);
    b.validate();
    CHECK(b.tokens() == leaves);
    // A binary tree over n leaves has n - 1 internal nodes.
    CHECK(b.size() == 2 * leaves.size() - 1);
  }
}

TEST_CASE("span unification") {
  const BinaryTree t1 = binarize(parse_bracketed_tree("(S a b)"));
  const BinaryTree t2 = binarize(parse_bracketed_tree("(S c d)"));
  const BinaryTree t3 = binarize(parse_bracketed_tree("(S e)"));

  const std::vector<BinaryTree> one{t1};
  CHECK(unify_spans(one) == t1);

  const std::vector<BinaryTree> two{t1, t2};
  CHECK(to_bracketed(unify_spans(two)) == "(SUPER (S a b) (S c d))");

  const std::vector<BinaryTree> three{t1, t2, t3};
  const BinaryTree u3 = unify_spans(three);
  CHECK(to_bracketed(u3) == "(SUPER (S a b) (SUPER (S c d) e))");
  u3.validate();
  CHECK(u3.tokens() == std::vector<std::string>{"a", "b", "c", "d", "e"});

  const std::vector<BinaryTree> tail{t2, t3};
  const std::vector<BinaryTree> nested{t1, unify_spans(tail)};
  CHECK(unify_spans(nested) == u3);

  CHECK(error_code_of([] { unify_spans({}); }) == ErrorCode::EmptyList);
}

TEST_CASE("mention resolution") {
  const BinaryTree t = binarize(parse_bracketed_tree("(S (NP the dog) (VP (V saw) (NP a cat)))"));
  const auto leaves = t.leaves();
  CHECK(resolve_mention_node(t, 2, 3) == leaves[2]);

  const NodeId np = resolve_mention_node(t, 3, 5);
  CHECK(t.node(np).label == "NP");
  CHECK(t.node(np).span_begin == 3);
  CHECK(t.node(np).span_end == 5);

  // (a (b c)): no node spans [0, 2).
  const BinaryTree r = binarize(parse_bracketed_tree("(X a (Y b c))"));
  for (const auto& n : r.nodes()) CHECK_FALSE((n.span_begin == 0 && n.span_end == 2));
  CHECK(resolve_mention_node(r, 0, 2) == r.leaves()[1]);

  CHECK(error_code_of([&] { resolve_mention_node(r, 2, 4); }) == ErrorCode::SpanOutOfBounds);
  CHECK(error_code_of([&] { resolve_mention_node(r, 1, 1); }) == ErrorCode::SpanOutOfBounds);
}

TEST_CASE("sibling and parent links") {
  const BinaryTree t = binarize(parse_bracketed_tree("(S a (T b c))"));
  const NodeId root = t.root();
  CHECK(t.parent(root) == kNoNode);
  CHECK(t.sibling(root) == kNoNode);
  CHECK(t.sibling(t.left(root)) == t.right(root));
  CHECK(t.sibling(t.right(root)) == t.left(root));
}

}  // TEST_SUITE
