#pragma once

#include <cmath>
#include <string>

#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"

namespace ltl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l2 = 0.0;
};

// One bias-corrected Adam step over every parameter. L2 enters as l2 * theta
// added to the gradient of decaying parameters before the moment update.
// Gradients are consumed (reset to zero).
template <class T>
void adam_step(ParameterStore<T>& store, const AdamConfig& cfg) {
  const long t = store.step() + 1;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < store.size(); ++k) {
    auto& p = store[k];
    Matrix<T> g = p.grad;
    if (p.decay && cfg.l2 != 0.0) g += p.value * static_cast<T>(cfg.l2);
    if (!g.allFinite()) throw Error(ErrorKind::kNaNGuard, "non-finite gradient for parameter '" + p.name + "'");
    p.m = p.m * static_cast<T>(cfg.beta1) + g * static_cast<T>(1.0 - cfg.beta1);
    p.v = p.v * static_cast<T>(cfg.beta2) + g.cwiseProduct(g) * static_cast<T>(1.0 - cfg.beta2);
    const Matrix<T> m_hat = p.m / static_cast<T>(correction1);
    const Matrix<T> v_hat = p.v / static_cast<T>(correction2);
    const Matrix<T> update =
        (m_hat.array() / (v_hat.array().sqrt() + static_cast<T>(cfg.eps))).matrix() * static_cast<T>(cfg.lr);
    if (!update.allFinite()) throw Error(ErrorKind::kNaNGuard, "non-finite update for parameter '" + p.name + "'");
    p.value -= update;
    p.grad.setZero();
  }
  store.set_step(t);
}

}  // namespace ltl
