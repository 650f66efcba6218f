#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/treekit/binary_tree.hpp"

namespace ltl {

namespace detail {

struct BracketToken {
  enum Kind { kOpen, kClose, kWord } kind;
  std::string_view text;
  std::size_t offset;
};

inline std::vector<BracketToken> tokenize_brackets(std::string_view text) {
  std::vector<BracketToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '(') {
      out.push_back({BracketToken::kOpen, text.substr(i, 1), i});
      ++i;
    } else if (ch == ')') {
      out.push_back({BracketToken::kClose, text.substr(i, 1), i});
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
             text[j] != '(' && text[j] != ')') {
        ++j;
      }
      out.push_back({BracketToken::kWord, text.substr(i, j - i), i});
      i = j;
    }
  }
  return out;
}

[[noreturn]] inline void syntax_error(const std::string& what, std::size_t offset) {
  throw Error(ErrorKind::kSyntaxError, what + " at byte " + std::to_string(offset));
}

}  // namespace detail

struct ParsedBinary {
  BinaryTree tree;
  std::vector<std::string> tokens;
};

// Parses "( ( the cat ) ( sat down ) )". Every group must hold exactly two
// children; a bare word is a one-token tree.
inline ParsedBinary parse_bracketed(std::string_view text) {
  const auto toks = detail::tokenize_brackets(text);
  ParsedBinary out;
  std::size_t pos = 0;

  auto parse_node = [&](auto&& self) -> BinaryTree {
    if (pos >= toks.size()) detail::syntax_error("unexpected end of input", text.size());
    const auto& tok = toks[pos];
    if (tok.kind == detail::BracketToken::kWord) {
      ++pos;
      out.tokens.emplace_back(tok.text);
      return BinaryTree::leaf(static_cast<int>(out.tokens.size()) - 1);
    }
    if (tok.kind == detail::BracketToken::kClose) detail::syntax_error("unbalanced ')'", tok.offset);
    ++pos;
    std::vector<BinaryTree> children;
    while (pos < toks.size() && toks[pos].kind != detail::BracketToken::kClose) {
      children.push_back(self(self));
    }
    if (pos >= toks.size()) detail::syntax_error("missing ')'", text.size());
    ++pos;
    if (children.size() != 2) {
      detail::syntax_error(children.empty() ? "empty node"
                                            : "node with " + std::to_string(children.size()) +
                                                  " children in binary mode",
                           tok.offset);
    }
    return BinaryTree::join(children[0], children[1]);
  };

  if (toks.empty()) detail::syntax_error("empty input", 0);
  out.tree = parse_node(parse_node);
  if (pos != toks.size()) detail::syntax_error("trailing input", toks[pos].offset);
  return out;
}

inline std::string render_bracketed(const BinaryTree& tree, const std::vector<std::string>& tokens) {
  if (tokens.size() != tree.num_leaves()) {
    throw Error(ErrorKind::kLengthMismatch, "tree has " + std::to_string(tree.num_leaves()) +
                                                " leaves but " + std::to_string(tokens.size()) +
                                                " tokens were given");
  }
  return tree.render(&tokens);
}

// Canonical spacing: every token and bracket separated by one space.
inline std::string normalize_bracketed(std::string_view text) {
  std::string out;
  for (const auto& tok : detail::tokenize_brackets(text)) {
    if (!out.empty()) out += ' ';
    out += tok.text;
  }
  return out;
}

// Whitespace tokenization, the only normalization applied to sentences.
inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace ltl
