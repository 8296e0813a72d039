#include "updown/composition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "updown/error.hpp"

namespace updown {

Vector tanh(const Vector& x) {
  return x.unaryExpr([](double v) { return std::tanh(v); });
}

EvalSchedule schedule(const BinaryTree& tree) {
  EvalSchedule s;
  const auto n = tree.size();
  std::vector<std::size_t> height(n, 0);
  for (NodeId i = 0; i < static_cast<NodeId>(n); ++i) {
    if (!tree.is_leaf(i))
      height[static_cast<std::size_t>(i)] =
          1 + std::max(height[static_cast<std::size_t>(tree.left(i))],
                       height[static_cast<std::size_t>(tree.right(i))]);
    s.upward.push_back(i);
  }
  std::stable_sort(s.upward.begin(), s.upward.end(), [&](NodeId a, NodeId b) {
    const auto ha = height[static_cast<std::size_t>(a)];
    const auto hb = height[static_cast<std::size_t>(b)];
    if (ha != hb) return ha < hb;
    return tree.node(a).span_begin < tree.node(b).span_begin;
  });

  if (n == 0) return s;
  std::deque<NodeId> queue{tree.root()};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    s.downward.push_back(id);
    const NodeId p = tree.parent(id);
    s.deps.emplace_back(p, tree.sibling(id));
    if (!tree.is_leaf(id)) {
      queue.push_back(tree.left(id));
      queue.push_back(tree.right(id));
    }
  }
  return s;
}

namespace {

void check_dims(const Matrix& m, std::size_t k, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != k ||
      static_cast<std::size_t>(m.cols()) != 2 * k)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " matrix must be K x 2K with K = " + std::to_string(k));
}

Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

// Storage order is children-before-parents, so index order is a valid
// upward order and its reverse a valid downward order.
std::vector<NodeId> index_order(std::size_t n, bool reverse) {
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = static_cast<NodeId>(reverse ? n - 1 - i : i);
  return order;
}

}  // namespace

NodeStates upward_pass(const BinaryTree& tree, const WordEmbeddings& emb,
                       const CompositionParams& params) {
  return upward_pass(tree, emb, params, index_order(tree.size(), false));
}

NodeStates upward_pass(const BinaryTree& tree, const WordEmbeddings& emb,
                       const CompositionParams& params,
                       std::span<const NodeId> order) {
  const std::size_t k = emb.dim();
  if (tree.size() > 1) check_dims(params.up, k, "upward");
  NodeStates s;
  s.up.resize(tree.size());
  for (NodeId id : order) {
    const TreeNode& node = tree.node(id);
    auto& out = s.up[static_cast<std::size_t>(id)];
    if (node.kind == NodeKind::Leaf) {
      out = emb.lookup(node.token);
    } else {
      out = tanh(params.up * stack(s.up[static_cast<std::size_t>(node.left)],
                                   s.up[static_cast<std::size_t>(node.right)]));
    }
    ++s.visits;
  }
  return s;
}

NodeStates downward_pass(const BinaryTree& tree, NodeStates states,
                         const CompositionParams& params) {
  return downward_pass(tree, std::move(states), params, index_order(tree.size(), true));
}

NodeStates downward_pass(const BinaryTree& tree, NodeStates states,
                         const CompositionParams& params,
                         std::span<const NodeId> order) {
  if (!states.has_upward() || states.up.size() != tree.size())
    throw Error(ErrorCode::UpwardNotComputed, "downward pass needs upward states");
  const std::size_t k = static_cast<std::size_t>(states.up.front().size());
  if (tree.size() > 1) check_dims(params.down, k, "downward");
  states.down.assign(tree.size(), Vector());
  for (NodeId id : order) {
    auto& out = states.down[static_cast<std::size_t>(id)];
    const NodeId parent = tree.parent(id);
    if (parent == kNoNode) {
      out = states.up[static_cast<std::size_t>(id)];  // root reuses u_0
      continue;
    }
    out = tanh(params.down * stack(states.down[static_cast<std::size_t>(parent)],
                                   states.up[static_cast<std::size_t>(tree.sibling(id))]));
    ++states.visits;
  }
  return states;
}

Vector additive_representation(std::span<const std::string> tokens,
                               const WordEmbeddings& emb) {
  if (tokens.empty())
    throw Error(ErrorCode::EmptyArgument, "additive representation of no tokens");
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(emb.dim()));
  for (const auto& t : tokens) sum += emb.lookup(t);
  return sum;
}

}  // namespace updown
