#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/treekit/binary_tree.hpp"
#include "ltl/treekit/bracketed.hpp"

namespace ltl {

// n-ary treebank tree. A leaf carries a token and no label.
struct LabeledTree {
  std::string label;
  std::string token;
  std::vector<LabeledTree> children;

  static LabeledTree make_leaf(std::string token) {
    LabeledTree t;
    t.token = std::move(token);
    return t;
  }

  static LabeledTree make_node(std::string label, std::vector<LabeledTree> children) {
    LabeledTree t;
    t.label = std::move(label);
    t.children = std::move(children);
    return t;
  }

  bool is_leaf() const { return children.empty(); }

  std::size_t num_leaves() const {
    if (is_leaf()) return 1;
    std::size_t n = 0;
    for (const auto& c : children) n += c.num_leaves();
    return n;
  }

  void collect_tokens(std::vector<std::string>& out) const {
    if (is_leaf()) {
      out.push_back(token);
      return;
    }
    for (const auto& c : children) c.collect_tokens(out);
  }

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    collect_tokens(out);
    return out;
  }

  friend bool operator==(const LabeledTree&, const LabeledTree&) = default;
};

// PTB-style "(S (NP the dog) (VP ran))". An unlabeled outer wrapper, as in
// "( (S ...) )", is read as ROOT.
inline LabeledTree parse_labeled(std::string_view text) {
  using detail::BracketToken;
  const auto toks = detail::tokenize_brackets(text);
  std::size_t pos = 0;

  auto parse_node = [&](auto&& self) -> LabeledTree {
    if (pos >= toks.size()) detail::syntax_error("unexpected end of input", text.size());
    const auto& tok = toks[pos];
    if (tok.kind == BracketToken::kWord) {
      ++pos;
      return LabeledTree::make_leaf(std::string(tok.text));
    }
    if (tok.kind == BracketToken::kClose) detail::syntax_error("unbalanced ')'", tok.offset);
    ++pos;
    std::string label = "ROOT";
    if (pos < toks.size() && toks[pos].kind == BracketToken::kWord) {
      label = std::string(toks[pos].text);
      ++pos;
    }
    std::vector<LabeledTree> children;
    while (pos < toks.size() && toks[pos].kind != BracketToken::kClose) {
      children.push_back(self(self));
    }
    if (pos >= toks.size()) detail::syntax_error("missing ')'", text.size());
    ++pos;
    if (children.empty()) detail::syntax_error("empty node", tok.offset);
    return LabeledTree::make_node(std::move(label), std::move(children));
  };

  if (toks.empty()) detail::syntax_error("empty input", 0);
  LabeledTree out = parse_node(parse_node);
  if (pos != toks.size()) detail::syntax_error("trailing input", toks[pos].offset);
  return out;
}

inline std::string render_labeled(const LabeledTree& t) {
  if (t.is_leaf()) return t.token;
  std::string out = "(" + t.label;
  for (const auto& c : t.children) out += " " + render_labeled(c);
  return out + ")";
}

namespace detail {

inline bool is_preterminal(const LabeledTree& t) {
  return t.children.size() == 1 && t.children.front().is_leaf();
}

inline LabeledTree collapse_internal(const LabeledTree& t) {
  if (t.is_leaf()) return t;
  // Part-of-speech preterminals below the root are not constituents.
  if (is_preterminal(t)) return t.children.front();
  const LabeledTree* node = &t;
  while (node->children.size() == 1) {
    const LabeledTree& child = node->children.front();
    if (is_preterminal(child)) return LabeledTree::make_node(node->label, {child.children.front()});
    node = &child;
  }
  LabeledTree out = LabeledTree::make_node(node->label, {});
  out.children.reserve(node->children.size());
  for (const auto& c : node->children) out.children.push_back(collapse_internal(c));
  return out;
}

}  // namespace detail

// Removes unary chains, keeping the lowest phrasal label of each chain.
// Part-of-speech preterminals below the root dissolve into their words, so
// (NP (NN dogs)) becomes (NP dogs). A single-word tree collapses to its lowest
// non-leaf node.
inline LabeledTree collapse_unary(const LabeledTree& t) {
  if (t.is_leaf()) return t;
  const LabeledTree* node = &t;
  while (node->children.size() == 1 && !node->children.front().is_leaf()) {
    node = &node->children.front();
  }
  if (node->children.size() == 1) return *node;
  LabeledTree out = LabeledTree::make_node(node->label, {});
  out.children.reserve(node->children.size());
  for (const auto& c : node->children) out.children.push_back(detail::collapse_internal(c));
  return out;
}

struct LabeledSpan {
  Span span;
  std::string label;

  friend bool operator==(const LabeledSpan&, const LabeledSpan&) = default;
  friend auto operator<=>(const LabeledSpan&, const LabeledSpan&) = default;
};

struct BinarizedTree {
  BinaryTree tree;
  std::vector<std::string> tokens;
  // One entry per original labeled node; helper nodes introduced by
  // binarization have no entry.
  std::vector<LabeledSpan> labels;
};

namespace detail {

inline BinaryTree binarize_node(const LabeledTree& t, int& next, std::vector<LabeledSpan>& labels) {
  if (t.is_leaf()) return BinaryTree::leaf(next++);
  const int begin = next;
  std::vector<BinaryTree> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(binarize_node(c, next, labels));
  labels.push_back({Span{begin, next}, t.label});
  // Right-nested: (c1 (c2 (... (ck-1 ck)))).
  BinaryTree acc = kids.back();
  for (std::size_t i = kids.size() - 1; i-- > 0;) acc = BinaryTree::join(kids[i], acc);
  return acc;
}

}  // namespace detail

inline BinarizedTree binarize(const LabeledTree& t) {
  if (t.num_leaves() == 0) throw Error(ErrorKind::kEmptyTree, "tree has no leaves");
  BinarizedTree out;
  int next = 0;
  out.tree = detail::binarize_node(t, next, out.labels);
  out.tokens = t.tokens();
  return out;
}

}  // namespace ltl
