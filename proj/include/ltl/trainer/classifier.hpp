#pragma once

#include <string>

#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"

namespace ltl {

// [u; v; u - v; u * v]
template <class T>
Expr<T> pair_features(Expr<T> u, Expr<T> v) {
  detail::require_same_shape("pair_features", u, v);
  return concat_rows<T>({u, v, sub(u, v), cmul(u, v)});
}

// Dropout on the features, one ReLU layer, then three logits.
template <class T>
class PairClassifier {
 public:
  PairClassifier() = default;
  PairClassifier(ParameterStore<T>& store, const std::string& name, Eigen::Index input, Eigen::Index hidden, Rng& rng) {
    w1_ = &store.add(name + ".W1", hidden, input, Init::kGlorot, rng);
    b1_ = &store.add(name + ".b1", hidden, 1, Init::kZero, rng);
    w2_ = &store.add(name + ".W2", 3, hidden, Init::kGlorot, rng);
    b2_ = &store.add(name + ".b2", 3, 1, Init::kZero, rng);
  }

  // `dropout_rng` null means evaluation (no dropout).
  Expr<T> logits(Graph<T>& g, Expr<T> features, double dropout, Rng* dropout_rng) const {
    if (dropout_rng != nullptr) features = ltl::dropout(features, dropout, *dropout_rng);
    const auto hidden = relu(affine(g.param(*w1_), features, g.param(*b1_)));
    return affine(g.param(*w2_), hidden, g.param(*b2_));
  }

 private:
  Parameter<T>* w1_ = nullptr;
  Parameter<T>* b1_ = nullptr;
  Parameter<T>* w2_ = nullptr;
  Parameter<T>* b2_ = nullptr;
};

}  // namespace ltl
