#pragma once

#include <vector>

#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/ops.hpp"

namespace ltl {

// Exponential moving average of batch-mean rewards, updated after use.
class EmaBaseline {
 public:
  explicit EmaBaseline(double decay = 0.9, double value = 0.0) : decay_(decay), value_(value) {}

  double value() const { return value_; }
  double decay() const { return decay_; }
  void update(double batch_mean_reward) { value_ = decay_ * value_ + (1.0 - decay_) * batch_mean_reward; }

 private:
  double decay_;
  double value_;
};

// -weight * (reward - baseline) * sum(log pi). The advantage is a constant,
// so gradients reach only the policy through the log-probabilities.
template <class T>
Expr<T> policy_loss(Graph<T>& g, const std::vector<Expr<T>>& log_probs, double advantage, double weight) {
  if (log_probs.empty() || weight == 0.0) return g.scalar(T(0));
  return scale(add(log_probs), -weight * advantage);
}

}  // namespace ltl
