#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ltl/encoders/cells.hpp"
#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"
#include "ltl/latentparsers/treelstm.hpp"
#include "ltl/treekit/transitions.hpp"

namespace ltl {

enum class SpinnVariant {
  kFull,          // tracker drives transitions and feeds composition
  kNoConnection,  // tracker drives transitions only
  kNoTracking,    // no tracker, no classifier: parses must be supplied
};

enum class TransitionMode { kGiven, kPredict, kSample };

template <class T>
struct SpinnResult {
  Expr<T> sentence;
  BinaryTree tree;
  TransitionSequence ops;
  std::vector<Expr<T>> log_probs;            // log p(chosen op), one per step
  std::vector<std::array<double, 2>> probs;  // [SHIFT, REDUCE] per step
};

// Shift-reduce encoder. Each step the tracker LSTM reads the top two stack
// phrases and the buffer head (learned pads stand in for missing items), and
// the classifier maps its state to [SHIFT, REDUCE] logits with illegal ops
// masked out.
template <class T>
class Spinn {
 public:
  Spinn() = default;
  Spinn(ParameterStore<T>& store, const std::string& name, SpinnVariant variant, Eigen::Index dim,
        Eigen::Index tracker_dim, Rng& rng)
      : variant_(variant), dim_(dim) {
    const bool tracked = variant != SpinnVariant::kNoTracking;
    if (tracked && tracker_dim <= 0) throw Error(ErrorKind::kInvalidConfig, "tracker width must be positive");
    compose_ = TreeLstm<T>(store, name + ".compose", dim, variant == SpinnVariant::kFull ? tracker_dim : 0, rng);
    if (!tracked) return;
    tracker_ = LstmCell<T>(store, name + ".tracker", 3 * dim, tracker_dim, rng);
    pads_ = &store.add(name + ".pads", dim, 3, Init::kZero, rng);
    cls_w_ = &store.add(name + ".cls.W", 2, tracker_dim, Init::kGlorot, rng);
    cls_b_ = &store.add(name + ".cls.b", 2, 1, Init::kZero, rng);
  }

  SpinnVariant variant() const { return variant_; }
  bool has_tracker() const { return variant_ != SpinnVariant::kNoTracking; }
  const TreeLstm<T>& composer() const { return compose_; }
  Parameter<T>& classifier_bias() const { return *cls_b_; }

  SpinnResult<T> encode(Graph<T>& g, const std::vector<Expr<T>>& leaves, TransitionMode mode,
                        const TransitionSequence* given = nullptr, Rng* rng = nullptr) const {
    const std::size_t n = leaves.size();
    if (n == 0) throw Error(ErrorKind::kEmptyTree, "cannot encode an empty sentence");
    if (!has_tracker() && mode != TransitionMode::kGiven) {
      throw Error(ErrorKind::kTransitionsRequired, "a model without a tracker only runs on given parses");
    }
    if (mode == TransitionMode::kGiven) {
      if (given == nullptr) throw Error(ErrorKind::kTransitionsRequired, "given mode needs a transition sequence");
      if (!is_valid_sequence(*given, n)) {
        throw Error(ErrorKind::kInvalidSequence, "'" + render_transitions(*given) + "' is not a valid sequence for " +
                                                     std::to_string(n) + " tokens");
      }
    }
    if (mode == TransitionMode::kSample && rng == nullptr) {
      throw Error(ErrorKind::kInvalidConfig, "sampling transitions needs an rng");
    }

    SpinnResult<T> out;
    std::vector<Phrase<T>> stack;
    std::size_t next = 0;
    LstmState<T> state;
    Expr<T> pad_top1, pad_top2, pad_buffer;
    if (has_tracker()) {
      state = tracker_.zero_state(g);
      const auto pads = g.param(*pads_);
      pad_top1 = slice_cols(pads, 0, 1);
      pad_top2 = slice_cols(pads, 1, 1);
      pad_buffer = slice_cols(pads, 2, 1);
    }

    const std::size_t steps = 2 * n - 1;
    for (std::size_t t = 0; t < steps; ++t) {
      const bool can_shift = next < n;
      const bool can_reduce = stack.size() >= 2;
      Op op = Op::kShift;
      if (has_tracker()) {
        const std::size_t s = stack.size();
        state = tracker_.step(g,
                              concat_rows<T>({s >= 1 ? stack[s - 1].h : pad_top1, s >= 2 ? stack[s - 2].h : pad_top2,
                                              can_shift ? leaves[next] : pad_buffer}),
                              state);
        const auto logits = affine(g.param(*cls_w_), state.h, g.param(*cls_b_));
        const auto logp = log_softmax(logits, {can_shift, can_reduce});
        const std::array<double, 2> p = {can_shift ? std::exp(static_cast<double>(logp.value()(0, 0))) : 0.0,
                                         can_reduce ? std::exp(static_cast<double>(logp.value()(1, 0))) : 0.0};
        switch (mode) {
          case TransitionMode::kGiven:
            op = (*given)[t];
            break;
          case TransitionMode::kPredict:
            op = (can_shift && (!can_reduce || logp.value()(0, 0) >= logp.value()(1, 0))) ? Op::kShift : Op::kReduce;
            break;
          case TransitionMode::kSample:
            op = (can_shift && (!can_reduce || rng->uniform() < p[0])) ? Op::kShift : Op::kReduce;
            break;
        }
        out.probs.push_back(p);
        out.log_probs.push_back(pick(logp, op == Op::kShift ? 0 : 1));
      } else {
        op = (*given)[t];
      }

      if (op == Op::kShift) {
        stack.push_back(leaf_phrase(g, leaves[next++]));
      } else {
        const Phrase<T> right = stack.back();
        stack.pop_back();
        const Phrase<T> left = stack.back();
        stack.pop_back();
        stack.push_back(variant_ == SpinnVariant::kFull ? compose_.compose(g, left, right, state.h)
                                                        : compose_.compose(g, left, right));
      }
      out.ops.push_back(op);
    }
    out.sentence = stack.back().h;
    out.tree = transitions_to_tree(out.ops);
    return out;
  }

 private:
  SpinnVariant variant_ = SpinnVariant::kFull;
  Eigen::Index dim_ = 0;
  TreeLstm<T> compose_;
  LstmCell<T> tracker_;
  Parameter<T>* pads_ = nullptr;
  Parameter<T>* cls_w_ = nullptr;
  Parameter<T>* cls_b_ = nullptr;
};

}  // namespace ltl
