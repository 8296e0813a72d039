#include "updown/tree.hpp"

#include <cctype>
#include <functional>

#include "updown/error.hpp"

namespace updown {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  RawTree parse() {
    skip_space();
    if (pos_ == text_.size())
      throw Error(ErrorCode::EmptyTree, "no tree in input", pos_);
    if (text_[pos_] != '(')
      throw Error(ErrorCode::UnbalancedBrackets, "expected '('", pos_);
    RawTree tree = parse_node();
    skip_space();
    if (pos_ != text_.size())
      throw Error(ErrorCode::UnbalancedBrackets,
                  "unexpected content after tree", pos_);
    if (tree.leaf_count() == 0 || tree.is_leaf())
      throw Error(ErrorCode::EmptyTree, "tree has no tokens", 0);
    return tree;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string read_atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Expects text_[pos_] == '('.
  RawTree parse_node() {
    const std::size_t open = pos_;
    ++pos_;
    RawTree node;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')')
      node.label = read_atom();
    for (;;) {
      skip_space();
      if (pos_ == text_.size())
        throw Error(ErrorCode::UnbalancedBrackets,
                    "unclosed bracket opened at " + std::to_string(open), pos_);
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        node.children.push_back(parse_node());
      } else {
        RawTree leaf;
        leaf.token = read_atom();
        node.children.push_back(std::move(leaf));
      }
    }
    if (node.children.empty())
      throw Error(ErrorCode::EmptyTree, "bracket without children", open);
    return node;
  }
};

}  // namespace

std::vector<std::string> RawTree::tokens() const {
  std::vector<std::string> out;
  std::function<void(const RawTree&)> walk = [&](const RawTree& t) {
    if (t.is_leaf()) {
      out.push_back(t.token);
      return;
    }
    for (const auto& c : t.children) walk(c);
  };
  walk(*this);
  return out;
}

std::size_t RawTree::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

RawTree parse_bracketed_tree(std::string_view text) {
  return BracketParser(text).parse();
}

// ---------------------------------------------------------------------------

BinaryTree BinaryTree::leaf(std::string token, std::string label) {
  BinaryTree t;
  TreeNode n;
  n.kind = NodeKind::Leaf;
  n.token = std::move(token);
  n.label = std::move(label);
  n.span_begin = 0;
  n.span_end = 1;
  t.nodes_.push_back(std::move(n));
  return t;
}

NodeId BinaryTree::append_subtree(const BinaryTree& other,
                                  std::size_t leaf_offset) {
  const auto base = static_cast<NodeId>(nodes_.size());
  for (const auto& src : other.nodes_) {
    TreeNode n = src;
    if (n.left != kNoNode) n.left += base;
    if (n.right != kNoNode) n.right += base;
    if (n.parent != kNoNode) n.parent += base;
    n.span_begin += leaf_offset;
    n.span_end += leaf_offset;
    nodes_.push_back(std::move(n));
  }
  return static_cast<NodeId>(nodes_.size()) - 1;
}

BinaryTree BinaryTree::join(const BinaryTree& left, const BinaryTree& right,
                            std::string label) {
  BinaryTree t;
  t.nodes_.reserve(left.size() + right.size() + 1);
  const NodeId l = t.append_subtree(left, 0);
  const NodeId r = t.append_subtree(right, left.leaf_count());
  TreeNode parent;
  parent.kind = NodeKind::Internal;
  parent.label = std::move(label);
  parent.left = l;
  parent.right = r;
  parent.span_begin = 0;
  parent.span_end = left.leaf_count() + right.leaf_count();
  t.nodes_.push_back(std::move(parent));
  const NodeId p = t.root();
  t.nodes_[static_cast<std::size_t>(l)].parent = p;
  t.nodes_[static_cast<std::size_t>(r)].parent = p;
  return t;
}

NodeId BinaryTree::sibling(NodeId id) const {
  const NodeId p = parent(id);
  if (p == kNoNode) return kNoNode;
  return left(p) == id ? right(p) : left(p);
}

std::size_t BinaryTree::leaf_count() const {
  return empty() ? 0 : node(root()).span_end;
}

std::vector<NodeId> BinaryTree::leaves() const {
  std::vector<NodeId> out(leaf_count(), kNoNode);
  for (NodeId i = 0; i < static_cast<NodeId>(size()); ++i)
    if (is_leaf(i)) out[node(i).span_begin] = i;
  return out;
}

std::vector<std::string> BinaryTree::tokens() const {
  std::vector<std::string> out;
  for (NodeId id : leaves()) out.push_back(node(id).token);
  return out;
}

void BinaryTree::validate() const {
  auto fail = [](const std::string& why) {
    throw Error(ErrorCode::MalformedInstance, "invalid binary tree: " + why);
  };
  if (empty()) fail("no nodes");
  const auto n = static_cast<NodeId>(size());
  std::vector<int> parent_refs(size(), 0);
  for (NodeId i = 0; i < n; ++i) {
    const TreeNode& t = node(i);
    if (t.kind == NodeKind::Leaf) {
      if (t.left != kNoNode || t.right != kNoNode) fail("leaf with children");
      if (t.span_end != t.span_begin + 1) fail("leaf span is not one token");
      continue;
    }
    if (t.left == kNoNode || t.right == kNoNode) fail("internal node arity");
    if (t.left >= i || t.right >= i) fail("child stored after parent");
    const TreeNode& l = node(t.left);
    const TreeNode& r = node(t.right);
    if (l.parent != i || r.parent != i) fail("parent link mismatch");
    ++parent_refs[static_cast<std::size_t>(t.left)];
    ++parent_refs[static_cast<std::size_t>(t.right)];
    if (l.span_begin != t.span_begin || l.span_end != r.span_begin ||
        r.span_end != t.span_end)
      fail("child spans do not concatenate");
  }
  for (NodeId i = 0; i < n; ++i) {
    const bool is_root = i == root();
    if (is_root != (node(i).parent == kNoNode)) fail("root/parent mismatch");
    if (parent_refs[static_cast<std::size_t>(i)] != (is_root ? 0 : 1))
      fail("node does not have exactly one parent");
  }
  if (node(root()).span_begin != 0) fail("root span does not start at 0");
}

// ---------------------------------------------------------------------------

namespace {

BinaryTree binarize_node(const RawTree& t, const std::string& inherited_label);

BinaryTree binarize_sequence(std::span<const RawTree> children,
                             const std::string& label) {
  BinaryTree head = binarize_node(children.front(), {});
  BinaryTree rest = children.size() == 2
                        ? binarize_node(children[1], {})
                        : binarize_sequence(children.subspan(1), label);
  return BinaryTree::join(head, rest, label);
}

BinaryTree binarize_node(const RawTree& t, const std::string& inherited_label) {
  if (t.is_leaf()) return BinaryTree::leaf(t.token, inherited_label);
  if (t.children.size() == 1) {
    // Unary: collapse; a preterminal passes its tag down to the leaf.
    return binarize_node(t.children.front(),
                         t.children.front().is_leaf() ? t.label : std::string{});
  }
  if (t.children.size() == 2)
    return BinaryTree::join(binarize_node(t.children[0], {}),
                            binarize_node(t.children[1], {}), t.label);
  BinaryTree head = binarize_node(t.children.front(), {});
  BinaryTree rest = binarize_sequence(
      std::span<const RawTree>(t.children).subspan(1), t.label + "|");
  return BinaryTree::join(head, rest, t.label);
}

}  // namespace

BinaryTree binarize(const RawTree& tree) {
  if (tree.leaf_count() == 0)
    throw Error(ErrorCode::EmptyTree, "cannot binarize a tree without leaves");
  return binarize_node(tree, {});
}

BinaryTree unify_spans(std::span<const BinaryTree> trees) {
  if (trees.empty())
    throw Error(ErrorCode::EmptyList, "no trees to unify");
  BinaryTree acc = trees.back();
  for (std::size_t i = trees.size() - 1; i-- > 0;)
    acc = BinaryTree::join(trees[i], acc, "SUPER");
  return acc;
}

NodeId resolve_mention_node(const BinaryTree& tree, std::size_t begin,
                            std::size_t end) {
  if (begin >= end || end > tree.leaf_count())
    throw Error(ErrorCode::SpanOutOfBounds,
                "mention span [" + std::to_string(begin) + ", " +
                    std::to_string(end) + ") outside " +
                    std::to_string(tree.leaf_count()) + " tokens");
  // Children precede parents, so the first exact match is the smallest.
  for (NodeId i = 0; i < static_cast<NodeId>(tree.size()); ++i) {
    const TreeNode& n = tree.node(i);
    if (n.span_begin == begin && n.span_end == end) return i;
  }
  return tree.leaves()[end - 1];
}

std::string to_bracketed(const BinaryTree& tree) {
  std::function<std::string(NodeId)> render = [&](NodeId id) -> std::string {
    const TreeNode& n = tree.node(id);
    if (n.kind == NodeKind::Leaf) return n.token;
    return "(" + n.label + " " + render(n.left) + " " + render(n.right) + ")";
  };
  return tree.empty() ? std::string{} : render(tree.root());
}

std::string to_bracketed(const RawTree& tree) {
  if (tree.is_leaf()) return tree.token;
  std::string out = "(" + tree.label;
  for (const auto& c : tree.children) out += " " + to_bracketed(c);
  return out + ")";
}

}  // namespace updown
