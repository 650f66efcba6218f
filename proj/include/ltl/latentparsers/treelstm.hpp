#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"
#include "ltl/treekit/binary_tree.hpp"

namespace ltl {

// A constituent representation. Columns may hold several phrases at once.
template <class T>
struct Phrase {
  Expr<T> h;
  Expr<T> c;
};

template <class T>
Phrase<T> leaf_phrase(Graph<T>& g, Expr<T> h) {
  return {h, g.input(Matrix<T>::Zero(h.rows(), h.cols()))};
}

// Binary TreeLSTM. Gate rows are [i, f_left, f_right, o, g] computed from
// [h_left; h_right] plus an optional tracker state:
//   c = f_l * c_l + f_r * c_r + i * g,  h = o * tanh(c)
template <class T>
class TreeLstm {
 public:
  TreeLstm() = default;
  TreeLstm(ParameterStore<T>& store, const std::string& name, Eigen::Index dim, Eigen::Index tracker_dim, Rng& rng)
      : dim_(dim), tracker_dim_(tracker_dim) {
    w_ = &store.add(name + ".W", 5 * dim, 2 * dim + tracker_dim, Init::kGlorot, rng);
    b_ = &store.add(name + ".b", 5 * dim, 1, Init::kZero, rng);
    b_->value.middleRows(dim, 2 * dim).setOnes();
  }

  Eigen::Index dim() const { return dim_; }
  Eigen::Index tracker_dim() const { return tracker_dim_; }

  // Works column-wise, so k phrase pairs compose in one call.
  Phrase<T> compose(Graph<T>& g, const Phrase<T>& left, const Phrase<T>& right,
                    std::optional<Expr<T>> tracker = std::nullopt) const {
    if (left.h.rows() != dim_ || right.h.rows() != dim_) detail::shape_mismatch("compose", left.h, right.h);
    if (tracker_dim_ > 0 && !tracker) {
      throw Error(ErrorKind::kShapeMismatch, "compose: tracker input of width " + std::to_string(tracker_dim_) +
                                                 " required");
    }
    std::vector<Expr<T>> parts = {left.h, right.h};
    if (tracker) {
      if (tracker->rows() != tracker_dim_) {
        throw Error(ErrorKind::kShapeMismatch, "compose: tracker input " +
                                                   shape_string(tracker->rows(), tracker->cols()) + ", expected " +
                                                   std::to_string(tracker_dim_) + " rows");
      }
      parts.push_back(*tracker);
    }
    const auto gates = affine(g.param(*w_), concat_rows(parts), g.param(*b_));
    const auto i = sigmoid(slice_rows(gates, 0, dim_));
    const auto fl = sigmoid(slice_rows(gates, dim_, dim_));
    const auto fr = sigmoid(slice_rows(gates, 2 * dim_, dim_));
    const auto o = sigmoid(slice_rows(gates, 3 * dim_, dim_));
    const auto cand = tanh(slice_rows(gates, 4 * dim_, dim_));
    const auto c = add<T>({cmul(fl, left.c), cmul(fr, right.c), cmul(i, cand)});
    return {cmul(o, tanh(c)), c};
  }

 private:
  Parameter<T>* w_ = nullptr;
  Parameter<T>* b_ = nullptr;
  Eigen::Index dim_ = 0;
  Eigen::Index tracker_dim_ = 0;
};

// Plain recursive evaluation of a tree over the given leaf vectors.
template <class T>
Phrase<T> compose_tree(Graph<T>& g, const TreeLstm<T>& cell, const BinaryTree& tree,
                       const std::vector<Expr<T>>& leaves) {
  if (tree.num_leaves() != leaves.size()) {
    throw Error(ErrorKind::kLengthMismatch, "tree has " + std::to_string(tree.num_leaves()) + " leaves, got " +
                                                std::to_string(leaves.size()) + " vectors");
  }
  std::vector<Phrase<T>> memo(tree.size());
  for (int i = 0; i <= tree.root(); ++i) {
    const auto& n = tree.node(i);
    memo[static_cast<std::size_t>(i)] =
        n.is_leaf() ? leaf_phrase(g, leaves[static_cast<std::size_t>(n.span.begin)])
                    : cell.compose(g, memo[static_cast<std::size_t>(n.left)], memo[static_cast<std::size_t>(n.right)]);
  }
  return memo.back();
}

}  // namespace ltl
