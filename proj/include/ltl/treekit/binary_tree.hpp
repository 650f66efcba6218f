#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "ltl/error.hpp"

namespace ltl {

// Half-open token interval [begin, end).
struct Span {
  int begin = 0;
  int end = 0;

  int length() const { return end - begin; }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Unlabeled, strictly binary tree over token positions 0..N-1.
//
// Nodes are stored in post-order with the root last. Because post-order is
// canonical for a given shape, two trees are equal iff their node arrays are
// equal, and the node array maps one-to-one onto a shift/reduce sequence.
class BinaryTree {
 public:
  struct Node {
    int left = -1;   // child index, -1 for leaves
    int right = -1;
    Span span;

    bool is_leaf() const { return left < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  BinaryTree() = default;

  static BinaryTree leaf(int position = 0) {
    BinaryTree t;
    t.nodes_.push_back(Node{-1, -1, Span{position, position + 1}});
    return t;
  }

  // Joins two trees; positions of `right` are shifted past those of `left`.
  static BinaryTree join(const BinaryTree& left, const BinaryTree& right) {
    if (left.empty() || right.empty()) {
      throw Error(ErrorKind::kEmptyTree, "cannot join an empty tree");
    }
    BinaryTree t;
    t.nodes_.reserve(left.nodes_.size() + right.nodes_.size() + 1);
    const int begin = left.root_span().begin;
    const int shift = left.root_span().end - right.root_span().begin;
    t.nodes_ = left.nodes_;
    const int offset = static_cast<int>(left.nodes_.size());
    for (Node n : right.nodes_) {
      if (!n.is_leaf()) {
        n.left += offset;
        n.right += offset;
      }
      n.span.begin += shift;
      n.span.end += shift;
      t.nodes_.push_back(n);
    }
    const int end = t.nodes_.back().span.end;
    t.nodes_.push_back(Node{offset - 1, static_cast<int>(t.nodes_.size()) - 1,
                            Span{begin, end}});
    return t;
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t num_leaves() const { return (nodes_.size() + 1) / 2; }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  Span root_span() const { return nodes_.back().span; }

  // Spans of all internal nodes (length >= 2, root included), sorted.
  std::vector<Span> constituents() const {
    std::vector<Span> out;
    out.reserve(nodes_.size() / 2);
    for (const Node& n : nodes_) {
      if (!n.is_leaf()) out.push_back(n.span);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool has_constituent(Span s) const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [&](const Node& n) { return !n.is_leaf() && n.span == s; });
  }

  // Root-to-leaf path length per token position.
  std::vector<int> leaf_depths() const {
    std::vector<int> depth(nodes_.size(), 0);
    std::vector<int> out(num_leaves(), 0);
    for (int i = root(); i >= 0; --i) {
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.is_leaf()) {
        out[static_cast<std::size_t>(n.span.begin)] = depth[static_cast<std::size_t>(i)];
      } else {
        depth[static_cast<std::size_t>(n.left)] = depth[static_cast<std::size_t>(i)] + 1;
        depth[static_cast<std::size_t>(n.right)] = depth[static_cast<std::size_t>(i)] + 1;
      }
    }
    return out;
  }

  int max_depth() const {
    const auto d = leaf_depths();
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
  }

  // Checks the structural invariants; used on trees built from raw nodes.
  bool valid() const {
    if (nodes_.empty() || nodes_.size() % 2 == 0) return false;
    int next_leaf = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.is_leaf()) {
        if (n.right >= 0 || n.span.begin != next_leaf || n.span.length() != 1) return false;
        ++next_leaf;
      } else {
        if (n.left < 0 || n.right < 0 || static_cast<std::size_t>(n.left) >= i ||
            static_cast<std::size_t>(n.right) >= i) {
          return false;
        }
        const Span l = nodes_[static_cast<std::size_t>(n.left)].span;
        const Span r = nodes_[static_cast<std::size_t>(n.right)].span;
        if (l.end != r.begin || n.span != Span{l.begin, r.end}) return false;
      }
    }
    return root_span() == Span{0, next_leaf};
  }

  friend bool operator==(const BinaryTree&, const BinaryTree&) = default;

  // Renders "( ( 0 1 ) 2 )", or with the given tokens in place of positions.
  std::string render(const std::vector<std::string>* tokens = nullptr) const {
    std::string out;
    if (!empty()) render_node(root(), tokens, out);
    return out;
  }

 private:
  void render_node(int i, const std::vector<std::string>* tokens, std::string& out) const {
    const Node& n = node(i);
    if (n.is_leaf()) {
      if (tokens != nullptr) {
        out += tokens->at(static_cast<std::size_t>(n.span.begin));
      } else {
        out += std::to_string(n.span.begin);
      }
      return;
    }
    out += "( ";
    render_node(n.left, tokens, out);
    out += ' ';
    render_node(n.right, tokens, out);
    out += " )";
  }

  std::vector<Node> nodes_;
};

}  // namespace ltl
