#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/rng.hpp"

// Differentiable operations over Graph nodes. Each op computes its forward
// value eagerly and records the exact analytic backward rule.
namespace ltl {

namespace detail {

template <class T>
[[noreturn]] void shape_mismatch(const char* op, const Expr<T>& a, const Expr<T>& b) {
  throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": " + shape_string(a.rows(), a.cols()) +
                                             " vs " + shape_string(b.rows(), b.cols()));
}

template <class T>
void require_same_shape(const char* op, const Expr<T>& a, const Expr<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch(op, a, b);
}

template <class T>
void require_scalar(const char* op, const Expr<T>& s) {
  if (s.rows() != 1 || s.cols() != 1) {
    throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": expected 1x1 scalar, got " +
                                               shape_string(s.rows(), s.cols()));
  }
}

template <class T>
void require_column(const char* op, const Expr<T>& a) {
  if (a.cols() != 1) {
    throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": expected a column vector, got " +
                                               shape_string(a.rows(), a.cols()));
  }
}

}  // namespace detail

template <class T>
Expr<T> matmul(Expr<T> a, Expr<T> b) {
  if (a.cols() != b.rows()) detail::shape_mismatch("matmul", a, b);
  Matrix<T> out = a.value() * b.value();
  return a.graph->record("matmul", std::move(out), {a, b}, [a, b](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    if (g.needs_grad(a.id)) g.add_grad(a.id, grad * g.value(b.id).transpose());
    if (g.needs_grad(b.id)) g.add_grad(b.id, g.value(a.id).transpose() * grad);
  });
}

// w * x + b, with the column bias broadcast over the columns of x.
template <class T>
Expr<T> affine(Expr<T> w, Expr<T> x, Expr<T> b) {
  if (w.cols() != x.rows()) detail::shape_mismatch("affine", w, x);
  if (b.cols() != 1 || b.rows() != w.rows()) detail::shape_mismatch("affine", w, b);
  Matrix<T> out = w.value() * x.value();
  out.colwise() += b.value().col(0);
  return w.graph->record("affine", std::move(out), {w, x, b}, [w, x, b](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    if (g.needs_grad(w.id)) g.add_grad(w.id, grad * g.value(x.id).transpose());
    if (g.needs_grad(x.id)) g.add_grad(x.id, g.value(w.id).transpose() * grad);
    if (g.needs_grad(b.id)) g.add_grad(b.id, grad.rowwise().sum());
  });
}

template <class T>
Expr<T> add(Expr<T> a, Expr<T> b) {
  detail::require_same_shape("add", a, b);
  return a.graph->record("add", a.value() + b.value(), {a, b}, [a, b](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self));
    g.add_grad(b.id, g.grad(self));
  });
}

template <class T>
Expr<T> add(const std::vector<Expr<T>>& terms) {
  if (terms.empty()) throw Error(ErrorKind::kShapeMismatch, "add: no operands");
  Matrix<T> out = terms.front().value();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    detail::require_same_shape("add", terms.front(), terms[i]);
    out += terms[i].value();
  }
  return terms.front().graph->record("add", std::move(out), terms, [terms](Graph<T>& g, int self) {
    for (const auto& t : terms) g.add_grad(t.id, g.grad(self));
  });
}

template <class T>
Expr<T> sub(Expr<T> a, Expr<T> b) {
  detail::require_same_shape("sub", a, b);
  return a.graph->record("sub", a.value() - b.value(), {a, b}, [a, b](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self));
    g.add_grad(b.id, -g.grad(self));
  });
}

template <class T>
Expr<T> cmul(Expr<T> a, Expr<T> b) {
  detail::require_same_shape("cmul", a, b);
  Matrix<T> out = a.value().cwiseProduct(b.value());
  return a.graph->record("cmul", std::move(out), {a, b}, [a, b](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    if (g.needs_grad(a.id)) g.add_grad(a.id, grad.cwiseProduct(g.value(b.id)));
    if (g.needs_grad(b.id)) g.add_grad(b.id, grad.cwiseProduct(g.value(a.id)));
  });
}

// mul * a + offset, elementwise with constants.
template <class T>
Expr<T> affine_scalar(Expr<T> a, double mul, double offset = 0.0) {
  const T m = static_cast<T>(mul);
  Matrix<T> out = (a.value() * m).array() + static_cast<T>(offset);
  return a.graph->record("affine_scalar", std::move(out), {a}, [a, m](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self) * m);
  });
}

template <class T>
Expr<T> scale(Expr<T> a, double factor) {
  return affine_scalar(a, factor, 0.0);
}

// a * s for a 1x1 node s.
template <class T>
Expr<T> mul_scalar(Expr<T> a, Expr<T> s) {
  detail::require_scalar("mul_scalar", s);
  Matrix<T> out = a.value() * s.scalar();
  return a.graph->record("mul_scalar", std::move(out), {a, s}, [a, s](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    if (g.needs_grad(a.id)) g.add_grad(a.id, grad * g.value(s.id)(0, 0));
    if (g.needs_grad(s.id)) g.add_grad(s.id, Matrix<T>::Constant(1, 1, grad.cwiseProduct(g.value(a.id)).sum()));
  });
}

// a / s for a 1x1 node s.
template <class T>
Expr<T> div_scalar(Expr<T> a, Expr<T> s) {
  detail::require_scalar("div_scalar", s);
  Matrix<T> out = a.value() / s.scalar();
  return a.graph->record("div_scalar", std::move(out), {a, s}, [a, s](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    const T sv = g.value(s.id)(0, 0);
    if (g.needs_grad(a.id)) g.add_grad(a.id, grad / sv);
    if (g.needs_grad(s.id)) {
      g.add_grad(s.id, Matrix<T>::Constant(1, 1, -grad.cwiseProduct(g.value(a.id)).sum() / (sv * sv)));
    }
  });
}

template <class T>
Expr<T> concat_rows(const std::vector<Expr<T>>& parts) {
  if (parts.empty()) throw Error(ErrorKind::kShapeMismatch, "concat_rows: no operands");
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts.front().cols()) detail::shape_mismatch("concat_rows", parts.front(), p);
    rows += p.rows();
  }
  Matrix<T> out(rows, parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return parts.front().graph->record("concat_rows", std::move(out), parts, [parts](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    Eigen::Index pos = 0;
    for (const auto& p : parts) {
      const Eigen::Index r = g.value(p.id).rows();
      if (g.needs_grad(p.id)) g.add_grad(p.id, grad.middleRows(pos, r));
      pos += r;
    }
  });
}

template <class T>
Expr<T> concat_cols(const std::vector<Expr<T>>& parts) {
  if (parts.empty()) throw Error(ErrorKind::kShapeMismatch, "concat_cols: no operands");
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts.front().rows()) detail::shape_mismatch("concat_cols", parts.front(), p);
    cols += p.cols();
  }
  Matrix<T> out(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return parts.front().graph->record("concat_cols", std::move(out), parts, [parts](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    Eigen::Index pos = 0;
    for (const auto& p : parts) {
      const Eigen::Index c = g.value(p.id).cols();
      if (g.needs_grad(p.id)) g.add_grad(p.id, grad.middleCols(pos, c));
      pos += c;
    }
  });
}

template <class T>
Expr<T> slice_rows(Expr<T> a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "slice_rows [" + std::to_string(begin) + ", " +
                                               std::to_string(begin + count) + ") of " +
                                               shape_string(a.rows(), a.cols()));
  }
  Matrix<T> out = a.value().middleRows(begin, count);
  return a.graph->record("slice_rows", std::move(out), {a}, [a, begin, count](Graph<T>& g, int self) {
    Matrix<T> full = Matrix<T>::Zero(g.value(a.id).rows(), g.value(a.id).cols());
    full.middleRows(begin, count) = g.grad(self);
    g.add_grad(a.id, full);
  });
}

template <class T>
Expr<T> slice_cols(Expr<T> a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "slice_cols [" + std::to_string(begin) + ", " +
                                               std::to_string(begin + count) + ") of " +
                                               shape_string(a.rows(), a.cols()));
  }
  Matrix<T> out = a.value().middleCols(begin, count);
  return a.graph->record("slice_cols", std::move(out), {a}, [a, begin, count](Graph<T>& g, int self) {
    Matrix<T> full = Matrix<T>::Zero(g.value(a.id).rows(), g.value(a.id).cols());
    full.middleCols(begin, count) = g.grad(self);
    g.add_grad(a.id, full);
  });
}

template <class T>
Expr<T> transpose(Expr<T> a) {
  Matrix<T> out = a.value().transpose();
  return a.graph->record("transpose", std::move(out), {a}, [a](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self).transpose());
  });
}

template <class T>
Expr<T> tanh(Expr<T> a) {
  Matrix<T> out = a.value().array().tanh();
  return a.graph->record("tanh", std::move(out), {a}, [a](Graph<T>& g, int self) {
    const auto& y = g.value(self);
    g.add_grad(a.id, g.grad(self).cwiseProduct((1 - y.array().square()).matrix()));
  });
}

template <class T>
Expr<T> sigmoid(Expr<T> a) {
  Matrix<T> out = (1 + (-a.value().array()).exp()).inverse();
  return a.graph->record("sigmoid", std::move(out), {a}, [a](Graph<T>& g, int self) {
    const auto& y = g.value(self);
    g.add_grad(a.id, g.grad(self).cwiseProduct((y.array() * (1 - y.array())).matrix()));
  });
}

// Subgradient 0 at the kink.
template <class T>
Expr<T> relu(Expr<T> a) {
  Matrix<T> out = a.value().cwiseMax(T(0));
  return a.graph->record("relu", std::move(out), {a}, [a](Graph<T>& g, int self) {
    const auto& x = g.value(a.id);
    g.add_grad(a.id, (x.array() > T(0)).select(g.grad(self), T(0)));
  });
}

template <class T>
Expr<T> exp(Expr<T> a) {
  Matrix<T> out = a.value().array().exp();
  return a.graph->record("exp", std::move(out), {a}, [a](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self).cwiseProduct(g.value(self)));
  });
}

template <class T>
Expr<T> log(Expr<T> a) {
  Matrix<T> out = a.value().array().log();
  return a.graph->record("log", std::move(out), {a}, [a](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self).cwiseQuotient(g.value(a.id)));
  });
}

// log(1 + e^x), computed stably.
template <class T>
Expr<T> softplus(Expr<T> a) {
  Matrix<T> out = a.value().unaryExpr([](T x) {
    return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  });
  return a.graph->record("softplus", std::move(out), {a}, [a](Graph<T>& g, int self) {
    Matrix<T> sig = (1 + (-g.value(a.id).array()).exp()).inverse();
    g.add_grad(a.id, g.grad(self).cwiseProduct(sig));
  });
}

namespace detail {

template <class T>
Matrix<T> softmax_columns(const Matrix<T>& x) {
  Matrix<T> out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const T mx = x.col(j).maxCoeff();
    out.col(j) = (x.col(j).array() - mx).exp();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

}  // namespace detail

// Column-wise softmax.
template <class T>
Expr<T> softmax(Expr<T> a) {
  Matrix<T> out = detail::softmax_columns(a.value());
  return a.graph->record("softmax", std::move(out), {a}, [a](Graph<T>& g, int self) {
    const auto& y = g.value(self);
    const auto& grad = g.grad(self);
    Matrix<T> dx(y.rows(), y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const T inner = grad.col(j).dot(y.col(j));
      dx.col(j) = y.col(j).cwiseProduct((grad.col(j).array() - inner).matrix());
    }
    g.add_grad(a.id, dx);
  });
}

// Log-softmax of a column vector. Entries with legal[i] == false get
// probability exactly 0 (value -inf) and receive no gradient.
template <class T>
Expr<T> log_softmax(Expr<T> a, const std::vector<bool>& legal = {}) {
  detail::require_column("log_softmax", a);
  const auto n = a.rows();
  if (!legal.empty() && static_cast<Eigen::Index>(legal.size()) != n) {
    throw Error(ErrorKind::kShapeMismatch, "log_softmax: mask of " + std::to_string(legal.size()) +
                                               " for " + std::to_string(n) + " logits");
  }
  auto is_legal = [&legal](Eigen::Index i) { return legal.empty() || legal[static_cast<std::size_t>(i)]; };
  const auto& x = a.value();
  T mx = -std::numeric_limits<T>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_legal(i)) mx = std::max(mx, x(i, 0));
  }
  if (!std::isfinite(static_cast<double>(mx))) {
    throw Error(ErrorKind::kShapeMismatch, "log_softmax: no legal entries");
  }
  T total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_legal(i)) total += std::exp(x(i, 0) - mx);
  }
  const T lse = mx + std::log(total);
  Matrix<T> out(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, 0) = is_legal(i) ? x(i, 0) - lse : -std::numeric_limits<T>::infinity();
  }
  return a.graph->record("log_softmax", std::move(out), {a}, [a, legal](Graph<T>& g, int self) {
    const auto& y = g.value(self);
    const auto& grad = g.grad(self);
    const auto rows = y.rows();
    T gsum = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (legal.empty() || legal[static_cast<std::size_t>(i)]) gsum += grad(i, 0);
    }
    Matrix<T> dx = Matrix<T>::Zero(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (legal.empty() || legal[static_cast<std::size_t>(i)]) dx(i, 0) = grad(i, 0) - std::exp(y(i, 0)) * gsum;
    }
    g.add_grad(a.id, dx);
  });
}

template <class T>
Expr<T> sum(Expr<T> a) {
  Matrix<T> out = Matrix<T>::Constant(1, 1, a.value().sum());
  return a.graph->record("sum", std::move(out), {a}, [a](Graph<T>& g, int self) {
    const auto& x = g.value(a.id);
    g.add_grad(a.id, Matrix<T>::Constant(x.rows(), x.cols(), g.grad(self)(0, 0)));
  });
}

template <class T>
Expr<T> mean(Expr<T> a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

template <class T>
Expr<T> dot(Expr<T> a, Expr<T> b) {
  detail::require_same_shape("dot", a, b);
  Matrix<T> out = Matrix<T>::Constant(1, 1, a.value().cwiseProduct(b.value()).sum());
  return a.graph->record("dot", std::move(out), {a, b}, [a, b](Graph<T>& g, int self) {
    const T s = g.grad(self)(0, 0);
    if (g.needs_grad(a.id)) g.add_grad(a.id, g.value(b.id) * s);
    if (g.needs_grad(b.id)) g.add_grad(b.id, g.value(a.id) * s);
  });
}

// Column j of m scaled by w(j); w is a column vector with one entry per column.
template <class T>
Expr<T> mul_cols(Expr<T> m, Expr<T> w) {
  if (w.cols() != 1 || w.rows() != m.cols()) detail::shape_mismatch("mul_cols", m, w);
  Matrix<T> out = m.value() * w.value().col(0).asDiagonal();
  return m.graph->record("mul_cols", std::move(out), {m, w}, [m, w](Graph<T>& g, int self) {
    const auto& grad = g.grad(self);
    if (g.needs_grad(m.id)) g.add_grad(m.id, grad * g.value(w.id).col(0).asDiagonal());
    if (g.needs_grad(w.id)) {
      g.add_grad(w.id, grad.cwiseProduct(g.value(m.id)).colwise().sum().transpose());
    }
  });
}

// Inclusive prefix sums of a column vector.
template <class T>
Expr<T> cumsum(Expr<T> a) {
  detail::require_column("cumsum", a);
  Matrix<T> out = a.value();
  for (Eigen::Index i = 1; i < out.rows(); ++i) out(i, 0) += out(i - 1, 0);
  return a.graph->record("cumsum", std::move(out), {a}, [a](Graph<T>& g, int self) {
    Matrix<T> dx = g.grad(self);
    for (Eigen::Index i = dx.rows() - 2; i >= 0; --i) dx(i, 0) += dx(i + 1, 0);
    g.add_grad(a.id, dx);
  });
}

template <class T>
Expr<T> pick(Expr<T> a, Eigen::Index row) {
  return slice_rows(a, row, 1);
}

// -log softmax(logits)[label] for a column of logits.
template <class T>
Expr<T> cross_entropy(Expr<T> logits, Eigen::Index label) {
  detail::require_column("cross_entropy", logits);
  if (label < 0 || label >= logits.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "cross_entropy: label " + std::to_string(label) + " out of " +
                                               std::to_string(logits.rows()));
  }
  Matrix<T> p = detail::softmax_columns(logits.value());
  const auto& x = logits.value();
  const T mx = x.maxCoeff();
  const T lse = mx + std::log((x.array() - mx).exp().sum());
  Matrix<T> out = Matrix<T>::Constant(1, 1, lse - x(label, 0));
  return logits.graph->record("cross_entropy", std::move(out), {logits},
                              [logits, label, p](Graph<T>& g, int self) {
                                Matrix<T> dx = p;
                                dx(label, 0) -= 1;
                                g.add_grad(logits.id, dx * g.grad(self)(0, 0));
                              });
}

// Inverted dropout: kept units are scaled by 1/(1-p). p = 0 is the identity.
template <class T>
Expr<T> dropout(Expr<T> a, double p, Rng& rng) {
  if (!(p >= 0.0) || p >= 1.0) {
    throw Error(ErrorKind::kInvalidConfig, "dropout probability must lie in [0, 1), got " + std::to_string(p));
  }
  if (p == 0.0) return a;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  Matrix<T> mask(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = rng.uniform() < p ? T(0) : keep_scale;
  }
  Matrix<T> out = a.value().cwiseProduct(mask);
  return a.graph->record("dropout", std::move(out), {a}, [a, mask](Graph<T>& g, int self) {
    g.add_grad(a.id, g.grad(self).cwiseProduct(mask));
  });
}

// Column `index` of a parameter table.
template <class T>
Expr<T> lookup(Graph<T>& g, Parameter<T>& table, Eigen::Index index) {
  return slice_cols(g.param(table), index, 1);
}

template <class T>
Expr<T> stop_gradient(Expr<T> a) {
  return a.graph->input(a.value());
}

// Forward value supplied by the caller; backward maps the output gradient to
// one gradient per parent.
template <class T>
Expr<T> custom_gradient(Matrix<T> value, const std::vector<Expr<T>>& parents,
                        std::function<std::vector<Matrix<T>>(const Matrix<T>& out_grad)> rule) {
  if (parents.empty()) throw Error(ErrorKind::kShapeMismatch, "custom_gradient: no parents");
  return parents.front().graph->record(
      "custom", std::move(value), parents, [parents, rule = std::move(rule)](Graph<T>& g, int self) {
        auto grads = rule(g.grad(self));
        for (std::size_t i = 0; i < parents.size() && i < grads.size(); ++i) {
          const auto& pv = g.value(parents[i].id);
          if (grads[i].rows() != pv.rows() || grads[i].cols() != pv.cols()) {
            throw Error(ErrorKind::kShapeMismatch, "custom_gradient: rule returned " +
                                                       shape_string(grads[i].rows(), grads[i].cols()) + " for " +
                                                       shape_string(pv.rows(), pv.cols()));
          }
          g.add_grad(parents[i].id, grads[i]);
        }
      });
}

}  // namespace ltl
