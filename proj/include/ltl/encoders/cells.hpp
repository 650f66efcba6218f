#pragma once

#include <string>

#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"

namespace ltl {

template <class T>
struct LstmState {
  Expr<T> h;
  Expr<T> c;
};

// Standard LSTM cell, gate rows ordered [i, f, o, g]. Forget bias starts at 1.
template <class T>
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterStore<T>& store, const std::string& name, Eigen::Index input, Eigen::Index hidden, Rng& rng)
      : input_(input), hidden_(hidden) {
    w_ = &store.add(name + ".W", 4 * hidden, input + hidden, Init::kGlorot, rng);
    b_ = &store.add(name + ".b", 4 * hidden, 1, Init::kZero, rng);
    b_->value.middleRows(hidden, hidden).setOnes();
  }

  Eigen::Index input() const { return input_; }
  Eigen::Index hidden() const { return hidden_; }

  LstmState<T> zero_state(Graph<T>& g) const {
    return {g.input(Matrix<T>::Zero(hidden_, 1)), g.input(Matrix<T>::Zero(hidden_, 1))};
  }

  LstmState<T> step(Graph<T>& g, Expr<T> x, const LstmState<T>& prev) const {
    const auto gates = affine(g.param(*w_), concat_rows<T>({x, prev.h}), g.param(*b_));
    const auto i = sigmoid(slice_rows(gates, 0, hidden_));
    const auto f = sigmoid(slice_rows(gates, hidden_, hidden_));
    const auto o = sigmoid(slice_rows(gates, 2 * hidden_, hidden_));
    const auto cand = tanh(slice_rows(gates, 3 * hidden_, hidden_));
    const auto c = add(cmul(f, prev.c), cmul(i, cand));
    return {cmul(o, tanh(c)), c};
  }

 private:
  Parameter<T>* w_ = nullptr;
  Parameter<T>* b_ = nullptr;
  Eigen::Index input_ = 0;
  Eigen::Index hidden_ = 0;
};

// GRU cell:
//   z = s(Wz[x;h] + bz), r = s(Wr[x;h] + br)
//   n = tanh(Wn[x; r*h] + bn), h' = (1 - z) * h + z * n
template <class T>
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterStore<T>& store, const std::string& name, Eigen::Index input, Eigen::Index hidden, Rng& rng)
      : input_(input), hidden_(hidden) {
    wzr_ = &store.add(name + ".Wzr", 2 * hidden, input + hidden, Init::kGlorot, rng);
    bzr_ = &store.add(name + ".bzr", 2 * hidden, 1, Init::kZero, rng);
    wn_ = &store.add(name + ".Wn", hidden, input + hidden, Init::kGlorot, rng);
    bn_ = &store.add(name + ".bn", hidden, 1, Init::kZero, rng);
  }

  Eigen::Index hidden() const { return hidden_; }

  Expr<T> zero_state(Graph<T>& g) const { return g.input(Matrix<T>::Zero(hidden_, 1)); }

  Expr<T> step(Graph<T>& g, Expr<T> x, Expr<T> h) const {
    const auto zr = sigmoid(affine(g.param(*wzr_), concat_rows<T>({x, h}), g.param(*bzr_)));
    const auto z = slice_rows(zr, 0, hidden_);
    const auto r = slice_rows(zr, hidden_, hidden_);
    const auto n = tanh(affine(g.param(*wn_), concat_rows<T>({x, cmul(r, h)}), g.param(*bn_)));
    return add(h, cmul(z, sub(n, h)));
  }

 private:
  Parameter<T>* wzr_ = nullptr;
  Parameter<T>* bzr_ = nullptr;
  Parameter<T>* wn_ = nullptr;
  Parameter<T>* bn_ = nullptr;
  Eigen::Index input_ = 0;
  Eigen::Index hidden_ = 0;
};

}  // namespace ltl
