#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/treekit/binary_tree.hpp"

namespace ltl {

enum class Op : unsigned char { kShift = 0, kReduce = 1 };

using TransitionSequence = std::vector<Op>;

// True iff `ops` is a complete, legal shift/reduce program over n tokens.
inline bool is_valid_sequence(const std::vector<Op>& ops, std::size_t n) {
  if (n == 0 || ops.size() != 2 * n - 1) return false;
  std::size_t shifts = 0;
  std::size_t stack = 0;
  for (Op op : ops) {
    if (op == Op::kShift) {
      if (shifts == n) return false;
      ++shifts;
      ++stack;
    } else {
      if (stack < 2) return false;
      --stack;
    }
  }
  return shifts == n && stack == 1;
}

inline TransitionSequence tree_to_transitions(const BinaryTree& tree) {
  TransitionSequence ops;
  ops.reserve(tree.size());
  for (const auto& node : tree.nodes()) {
    ops.push_back(node.is_leaf() ? Op::kShift : Op::kReduce);
  }
  return ops;
}

inline BinaryTree transitions_to_tree(const TransitionSequence& ops) {
  if (ops.empty()) throw Error(ErrorKind::kInvalidSequence, "empty sequence");
  std::vector<BinaryTree> stack;
  int next = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i] == Op::kShift) {
      stack.push_back(BinaryTree::leaf(next++));
    } else {
      if (stack.size() < 2) {
        throw Error(ErrorKind::kInvalidSequence,
                    "REDUCE at step " + std::to_string(i) + " with stack size " +
                        std::to_string(stack.size()));
      }
      BinaryTree right = std::move(stack.back());
      stack.pop_back();
      BinaryTree left = std::move(stack.back());
      stack.pop_back();
      stack.push_back(BinaryTree::join(left, right));
    }
  }
  if (stack.size() != 1) {
    throw Error(ErrorKind::kInvalidSequence,
                "final stack size " + std::to_string(stack.size()) + " != 1");
  }
  return std::move(stack.front());
}

// "S S R" <-> ops. Accepts S/R or SHIFT/REDUCE tokens.
inline std::string render_transitions(const TransitionSequence& ops) {
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i > 0) out += ' ';
    out += ops[i] == Op::kShift ? 'S' : 'R';
  }
  return out;
}

inline TransitionSequence parse_transitions(std::string_view text) {
  TransitionSequence ops;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != ',') ++j;
    const std::string_view tok = text.substr(i, j - i);
    if (tok == "S" || tok == "SHIFT") {
      ops.push_back(Op::kShift);
    } else if (tok == "R" || tok == "REDUCE") {
      ops.push_back(Op::kReduce);
    } else if (!tok.empty()) {
      throw Error(ErrorKind::kSyntaxError,
                  "unknown transition '" + std::string(tok) + "' at offset " + std::to_string(i));
    }
    i = j;
  }
  return ops;
}

}  // namespace ltl
