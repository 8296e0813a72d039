#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "updown/embeddings.hpp"
#include "updown/tree.hpp"

namespace updown {

// Upward matrix U and downward matrix D, both K x 2K, no bias terms.
struct CompositionParams {
  Matrix up;
  Matrix down;

  std::size_t dim() const { return static_cast<std::size_t>(up.rows()); }
};

// Evaluation orders for the combined up-down network.
//  upward:   children before parents (by subtree height, then left to right)
//  downward: parents before children (breadth first, left before right)
// deps[k] is the (parent, sibling) pair feeding downward[k]; the root's entry
// is (kNoNode, kNoNode).
struct EvalSchedule {
  std::vector<NodeId> upward;
  std::vector<NodeId> downward;
  std::vector<std::pair<NodeId, NodeId>> deps;
};

EvalSchedule schedule(const BinaryTree& tree);

struct NodeStates {
  std::vector<Vector> up;    // u_i per node id
  std::vector<Vector> down;  // d_i per node id, empty until downward_pass
  std::size_t visits = 0;    // node evaluations performed

  bool has_upward() const { return !up.empty(); }
  bool has_downward() const { return !down.empty(); }
};

// u_leaf = embedding of its token; u_i = tanh(U [u_left; u_right]).
NodeStates upward_pass(const BinaryTree& tree, const WordEmbeddings& emb,
                       const CompositionParams& params);
NodeStates upward_pass(const BinaryTree& tree, const WordEmbeddings& emb,
                       const CompositionParams& params,
                       std::span<const NodeId> order);

// d_root = u_root; d_i = tanh(D [d_parent; u_sibling]).
// Throws Error{UpwardNotComputed} when `states` lacks upward vectors.
NodeStates downward_pass(const BinaryTree& tree, NodeStates states,
                         const CompositionParams& params);
NodeStates downward_pass(const BinaryTree& tree, NodeStates states,
                         const CompositionParams& params,
                         std::span<const NodeId> order);

// Sum of the tokens' embedding rows (OOV contributes zeros).
// Throws Error{EmptyArgument}.
Vector additive_representation(std::span<const std::string> tokens,
                               const WordEmbeddings& emb);

Vector tanh(const Vector& x);

}  // namespace updown
