#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"
#include "ltl/latentparsers/treelstm.hpp"
#include "ltl/treekit/binary_tree.hpp"

namespace ltl {

// Index of the largest entry; ties go to the lowest index.
template <class Derived>
Eigen::Index first_argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

// One-hot of argmax(logits) going forward (or of `forced` when >= 0); the
// backward pass treats the output as softmax(logits).
template <class T>
Expr<T> straight_through_select(Expr<T> logits, Eigen::Index forced = -1, Eigen::Index* chosen = nullptr) {
  detail::require_column("straight_through_select", logits);
  const Matrix<T> p = detail::softmax_columns(logits.value());
  const Eigen::Index k = forced >= 0 ? forced : first_argmax(logits.value().col(0));
  if (chosen != nullptr) *chosen = k;
  Matrix<T> y = Matrix<T>::Zero(logits.rows(), 1);
  y(k, 0) = T(1);
  return custom_gradient<T>(std::move(y), {logits}, [p](const Matrix<T>& grad) {
    // J^T g with J = diag(p) - p p^T.
    const T inner = p.col(0).dot(grad.col(0));
    Matrix<T> d = p.cwiseProduct((grad.array() - inner).matrix());
    return std::vector<Matrix<T>>{d};
  });
}

// Test hooks: fixed noise and selections per layer, and the option of
// treating selections as constants.
struct GumbelControl {
  std::vector<std::vector<double>> noise;
  std::vector<int> selections;
  bool straight_through = true;
};

template <class T>
struct GumbelResult {
  Expr<T> sentence;
  BinaryTree tree;
  std::vector<int> selections;                // merged pair per layer
  std::vector<Eigen::VectorXd> distributions;  // soft selection weights per layer
  double temperature = 1.0;
};

// Easy-first composition: each layer composes every adjacent pair, scores
// the candidates against a learned query vector, and keeps one.
template <class T>
class StGumbel {
 public:
  StGumbel() = default;
  StGumbel(ParameterStore<T>& store, const std::string& name, Eigen::Index dim, Rng& rng) : dim_(dim) {
    compose_ = TreeLstm<T>(store, name + ".compose", dim, 0, rng);
    query_ = &store.add(name + ".query", dim, 1, Init::kGlorot, rng);
    // softplus(log(e - 1)) = 1
    temp_ = &store.add(name + ".temperature", 1, 1, Init::kConstant, rng, std::log(std::exp(1.0) - 1.0), false);
  }

  const TreeLstm<T>& composer() const { return compose_; }
  Parameter<T>& temperature_param() const { return *temp_; }

  double temperature() const {
    const double raw = static_cast<double>(temp_->value(0, 0));
    return raw > 0.0 ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
  }

  GumbelResult<T> encode(Graph<T>& g, const std::vector<Expr<T>>& leaves, bool train, Rng* rng = nullptr,
                         const GumbelControl* control = nullptr) const {
    if (leaves.empty()) throw Error(ErrorKind::kEmptyTree, "cannot encode an empty sentence");
    GumbelResult<T> out;
    out.temperature = temperature();
    std::vector<BinaryTree> trees(leaves.size(), BinaryTree::leaf(0));
    Expr<T> h = concat_cols(leaves);
    Expr<T> c = g.input(Matrix<T>::Zero(dim_, static_cast<Eigen::Index>(leaves.size())));
    const auto q = g.param(*query_);
    const auto tau = softplus(g.param(*temp_));

    for (std::size_t layer = 0; trees.size() > 1; ++layer) {
      const Eigen::Index m = static_cast<Eigen::Index>(trees.size());
      const Phrase<T> left{slice_cols(h, 0, m - 1), slice_cols(c, 0, m - 1)};
      const Phrase<T> right{slice_cols(h, 1, m - 1), slice_cols(c, 1, m - 1)};
      const Phrase<T> cand = compose_.compose(g, left, right);
      if (m == 2) {
        h = cand.h;
        c = cand.c;
        out.selections.push_back(0);
        out.distributions.push_back(Eigen::VectorXd::Ones(1));
        trees = {BinaryTree::join(trees[0], trees[1])};
        break;
      }

      const int forced =
          (control != nullptr && layer < control->selections.size()) ? control->selections[layer] : -1;
      const auto scores = matmul(transpose(cand.h), q);
      Expr<T> perturbed = scores;
      if (train) {
        Matrix<T> noise(m - 1, 1);
        for (Eigen::Index i = 0; i < m - 1; ++i) {
          if (control != nullptr && layer < control->noise.size()) {
            noise(i, 0) = static_cast<T>(control->noise[layer].at(static_cast<std::size_t>(i)));
          } else {
            if (rng == nullptr) throw Error(ErrorKind::kInvalidConfig, "training mode needs an rng");
            noise(i, 0) = static_cast<T>(rng->gumbel());
          }
        }
        perturbed = add(scores, g.input(noise));
      }
      const auto logits = div_scalar(perturbed, tau);
      out.distributions.push_back(detail::softmax_columns(logits.value()).col(0).template cast<double>());

      Eigen::Index k = 0;
      Expr<T> y;
      if (train && (control == nullptr || control->straight_through)) {
        y = straight_through_select(logits, forced, &k);
      } else {
        k = forced >= 0 ? forced : first_argmax(perturbed.value().col(0));
        Matrix<T> onehot = Matrix<T>::Zero(m - 1, 1);
        onehot(k, 0) = T(1);
        y = g.input(std::move(onehot));
      }
      out.selections.push_back(static_cast<int>(k));

      // Columns left of k keep their node, column k takes the candidate,
      // columns right of k take their right neighbour.
      const auto upto = cumsum(y);
      const auto keep_left = affine_scalar(upto, -1.0, 1.0);
      const auto take_right = sub(upto, y);
      h = add<T>({mul_cols(left.h, keep_left), mul_cols(cand.h, y), mul_cols(right.h, take_right)});
      c = add<T>({mul_cols(left.c, keep_left), mul_cols(cand.c, y), mul_cols(right.c, take_right)});
      const auto ku = static_cast<std::size_t>(k);
      trees[ku] = BinaryTree::join(trees[ku], trees[ku + 1]);
      trees.erase(trees.begin() + static_cast<long>(ku) + 1);
    }
    out.sentence = h;
    out.tree = trees.front();
    return out;
  }

 private:
  Eigen::Index dim_ = 0;
  TreeLstm<T> compose_;
  Parameter<T>* query_ = nullptr;
  Parameter<T>* temp_ = nullptr;
};

}  // namespace ltl
