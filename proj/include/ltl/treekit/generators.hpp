#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/gradcore/rng.hpp"
#include "ltl/treekit/binary_tree.hpp"
#include "ltl/treekit/transitions.hpp"

namespace ltl {

inline constexpr std::size_t kMaxEnumeratedLeaves = 10;

// All distinct binary trees over n leaves; Catalan(n-1) of them.
inline std::vector<BinaryTree> enumerate_trees(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kEmptyTree, "enumerate_trees needs n >= 1");
  if (n > kMaxEnumeratedLeaves) {
    throw Error(ErrorKind::kSizeLimit, "enumerate_trees capped at n = 10, got " + std::to_string(n));
  }
  // by_size[k] holds every tree over k leaves rooted at position 0.
  std::vector<std::vector<BinaryTree>> by_size(n + 1);
  by_size[1].push_back(BinaryTree::leaf(0));
  for (std::size_t k = 2; k <= n; ++k) {
    for (std::size_t split = 1; split < k; ++split) {
      for (const auto& left : by_size[split]) {
        for (const auto& right : by_size[k - split]) {
          by_size[k].push_back(BinaryTree::join(left, right));
        }
      }
    }
  }
  return std::move(by_size[n]);
}

inline BinaryTree gen_left(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kEmptyTree, "gen_left needs n >= 1");
  BinaryTree t = BinaryTree::leaf(0);
  for (std::size_t i = 1; i < n; ++i) t = BinaryTree::join(t, BinaryTree::leaf(0));
  return t;
}

inline BinaryTree gen_right(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kEmptyTree, "gen_right needs n >= 1");
  BinaryTree t = BinaryTree::leaf(0);
  for (std::size_t i = 1; i < n; ++i) t = BinaryTree::join(BinaryTree::leaf(0), t);
  return t;
}

// Maximally shallow, right-aligned tree: each level pairs adjacent nodes from
// the right; with an odd count the leftmost node is carried up unmerged.
inline BinaryTree gen_balanced(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kEmptyTree, "gen_balanced needs n >= 1");
  std::vector<BinaryTree> level;
  level.reserve(n);
  for (std::size_t i = 0; i < n; ++i) level.push_back(BinaryTree::leaf(0));
  while (level.size() > 1) {
    std::vector<BinaryTree> next;
    const std::size_t carry = level.size() % 2;
    if (carry) next.push_back(level.front());
    for (std::size_t i = carry; i + 1 < level.size(); i += 2) {
      next.push_back(BinaryTree::join(level[i], level[i + 1]));
    }
    level = std::move(next);
  }
  return level.front();
}

// Uniform choice among the legal transitions at every step.
inline BinaryTree gen_random_transitions(std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::kEmptyTree, "gen_random_transitions needs n >= 1");
  TransitionSequence ops;
  ops.reserve(2 * n - 1);
  std::size_t buffer = n;
  std::size_t stack = 0;
  while (buffer > 0 || stack > 1) {
    const bool can_shift = buffer > 0;
    const bool can_reduce = stack >= 2;
    Op op;
    if (can_shift && can_reduce) {
      op = rng.below(2) == 0 ? Op::kShift : Op::kReduce;
    } else {
      op = can_shift ? Op::kShift : Op::kReduce;
    }
    if (op == Op::kShift) {
      --buffer;
      ++stack;
    } else {
      --stack;
    }
    ops.push_back(op);
  }
  return transitions_to_tree(ops);
}

// n-1 merges, each of a uniformly chosen adjacent pair of current nodes.
inline BinaryTree gen_random_merge(std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::kEmptyTree, "gen_random_merge needs n >= 1");
  std::vector<BinaryTree> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(BinaryTree::leaf(0));
  while (nodes.size() > 1) {
    const std::size_t i = rng.below(nodes.size() - 1);
    nodes[i] = BinaryTree::join(nodes[i], nodes[i + 1]);
    nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
  return nodes.front();
}

}  // namespace ltl
