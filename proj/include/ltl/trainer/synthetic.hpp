#pragma once

#include <string>
#include <vector>

#include "ltl/encoders/embeddings.hpp"
#include "ltl/error.hpp"
#include "ltl/gradcore/rng.hpp"
#include "ltl/trainer/corpus.hpp"
#include "ltl/treekit/generators.hpp"

namespace ltl {

// Desk-scale entailment stand-in. Tokens are digits plus "~", which negates
// the digit right after it. A sentence's value is its signed digit sum and
// the label compares the two values.
namespace synthetic {

inline constexpr double kNegationRate = 0.25;

inline int value_of(const std::vector<std::string>& tokens) {
  int total = 0;
  int sign = 1;
  for (const auto& t : tokens) {
    if (t == "~") {
      sign = -sign;
    } else {
      total += sign * std::stoi(t);
      sign = 1;
    }
  }
  return total;
}

inline Label label_for(int v1, int v2) {
  if (v1 > v2) return Label::kEntailment;
  if (v1 < v2) return Label::kContradiction;
  return Label::kNeutral;
}

// Exactly `len` tokens; "~" only ever precedes a digit. The gold parse
// groups each "~ d" and joins the units right-branching.
inline Sentence sentence(std::size_t len, Rng& rng) {
  Sentence s;
  std::vector<BinaryTree> units;
  while (s.tokens.size() < len) {
    const bool negate = len - s.tokens.size() >= 2 && rng.bernoulli(kNegationRate);
    const std::string digit = std::to_string(rng.below(10));
    if (negate) {
      s.tokens.push_back("~");
      s.tokens.push_back(digit);
      units.push_back(BinaryTree::join(BinaryTree::leaf(), BinaryTree::leaf()));
    } else {
      s.tokens.push_back(digit);
      units.push_back(BinaryTree::leaf());
    }
  }
  BinaryTree tree = units.back();
  for (std::size_t i = units.size() - 1; i-- > 0;) tree = BinaryTree::join(units[i], tree);
  s.parse = std::move(tree);
  return s;
}

inline std::vector<std::string> vocabulary() {
  std::vector<std::string> v = {"~"};
  for (int d = 0; d < 10; ++d) v.push_back(std::to_string(d));
  return v;
}

}  // namespace synthetic

// Labels cycle through the three classes (then the corpus is shuffled), and
// the second sentence is redrawn until it produces the wanted label.
inline Corpus gen_synthetic(std::size_t size, std::size_t min_len, std::size_t max_len, std::uint64_t seed,
                            const std::string& id_prefix = "p") {
  if (min_len < 2 || max_len > 16 || min_len > max_len) {
    throw Error(ErrorKind::kInvalidConfig, "sentence lengths must satisfy 2 <= min <= max <= 16");
  }
  Rng rng(derive_seed(seed, "synthetic"));
  auto draw_len = [&] { return min_len + rng.below(max_len - min_len + 1); };
  Corpus c;
  c.source = "synthetic";
  c.examples.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    Example ex;
    ex.label = static_cast<Label>(i % 3);
    for (;;) {
      ex.s1 = synthetic::sentence(draw_len(), rng);
      const int v1 = synthetic::value_of(ex.s1.tokens);
      bool found = false;
      for (int attempt = 0; attempt < 200 && !found; ++attempt) {
        ex.s2 = synthetic::sentence(draw_len(), rng);
        found = synthetic::label_for(v1, synthetic::value_of(ex.s2.tokens)) == ex.label;
      }
      if (found) break;
    }
    c.examples.push_back(std::move(ex));
  }
  for (std::size_t i = c.examples.size(); i > 1; --i) std::swap(c.examples[i - 1], c.examples[rng.below(i)]);
  for (std::size_t i = 0; i < c.examples.size(); ++i) c.examples[i].id = id_prefix + std::to_string(i);
  return c;
}

// Random frozen vectors for the synthetic vocabulary.
inline EmbeddingTable synthetic_embeddings(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "embeddings"));
  EmbeddingTable table(dim);
  for (const auto& tok : synthetic::vocabulary()) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.uniform(-1.0, 1.0);
    table.add(tok, v);
  }
  return table;
}

}  // namespace ltl
