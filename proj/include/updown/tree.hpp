#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace updown {

// N-ary constituency tree as read from bracketed text. A leaf carries a
// token and no label; an internal node carries a category label.
struct RawTree {
  std::string label;
  std::string token;
  std::vector<RawTree> children;

  bool is_leaf() const { return children.empty(); }
  std::vector<std::string> tokens() const;
  std::size_t leaf_count() const;
};

// Parses one PTB-style bracketed tree, e.g. "(S (NP she) (VP was hungry))".
// Throws Error{UnbalancedBrackets | EmptyTree} with the byte offset of the
// first violation.
RawTree parse_bracketed_tree(std::string_view text);

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind : std::uint8_t { Leaf, Internal };

struct TreeNode {
  NodeKind kind = NodeKind::Leaf;
  std::string label;  // category; leaves keep their preterminal tag if any
  std::string token;  // leaves only
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  NodeId parent = kNoNode;
  std::size_t span_begin = 0;  // leaf offsets, half-open
  std::size_t span_end = 0;

  bool operator==(const TreeNode&) const = default;
};

// Strictly binary tree. Nodes are stored children-before-parents, so the
// root is always the last node and index order is a valid upward order.
class BinaryTree {
 public:
  BinaryTree() = default;

  static BinaryTree leaf(std::string token, std::string label = {});
  static BinaryTree join(const BinaryTree& left, const BinaryTree& right,
                         std::string label);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeId root() const { return static_cast<NodeId>(nodes_.size()) - 1; }
  const TreeNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::span<const TreeNode> nodes() const { return nodes_; }

  bool is_leaf(NodeId id) const { return node(id).kind == NodeKind::Leaf; }
  NodeId left(NodeId id) const { return node(id).left; }
  NodeId right(NodeId id) const { return node(id).right; }
  NodeId parent(NodeId id) const { return node(id).parent; }
  NodeId sibling(NodeId id) const;

  std::size_t leaf_count() const;
  // Leaf node ids in token order.
  std::vector<NodeId> leaves() const;
  std::vector<std::string> tokens() const;

  // Checks every structural invariant; throws Error{MalformedInstance}.
  void validate() const;

  bool operator==(const BinaryTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;

  NodeId append_subtree(const BinaryTree& other, std::size_t leaf_offset);
};

// Right-branching binarization: children c1..ck of an n-ary node become
// c1 (c2 (... ck)), intermediate nodes labeled "<parent>|". Unary chains
// collapse onto their lowest node.
BinaryTree binarize(const RawTree& tree);

// Joins argument subtrees, in textual order, under a right-branching
// "SUPER" spine. Throws Error{EmptyList}.
BinaryTree unify_spans(std::span<const BinaryTree> trees);

// Smallest node whose leaf span equals [begin, end) exactly, otherwise the
// leaf of the span's final token. Throws Error{SpanOutOfBounds}.
NodeId resolve_mention_node(const BinaryTree& tree, std::size_t begin,
                            std::size_t end);

std::string to_bracketed(const BinaryTree& tree);
std::string to_bracketed(const RawTree& tree);

}  // namespace updown
