#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ltl/error.hpp"
#include "ltl/gradcore/rng.hpp"

namespace ltl {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

inline std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

enum class Init { kGlorot, kZero, kConstant };

template <class T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
  Matrix<T> m;  // Adam first moment
  Matrix<T> v;  // Adam second moment
  bool decay = true;  // subject to L2

  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

// Named trainable parameters in insertion order. Parameter addresses are
// stable for the lifetime of the store.
template <class T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  Parameter<T>& add(const std::string& name, Eigen::Index rows, Eigen::Index cols, Init init,
                    Rng& rng, double constant = 0.0, bool decay = true) {
    if (index_.count(name) != 0) throw Error(ErrorKind::kInvalidConfig, "duplicate parameter '" + name + "'");
    auto p = std::make_unique<Parameter<T>>();
    p->name = name;
    p->decay = decay;
    p->value.resize(rows, cols);
    switch (init) {
      case Init::kGlorot: {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (Eigen::Index j = 0; j < cols; ++j) {
          for (Eigen::Index i = 0; i < rows; ++i) p->value(i, j) = static_cast<T>(rng.uniform(-limit, limit));
        }
        break;
      }
      case Init::kZero:
        p->value.setZero();
        break;
      case Init::kConstant:
        p->value.setConstant(static_cast<T>(constant));
        break;
    }
    p->grad = Matrix<T>::Zero(rows, cols);
    p->m = Matrix<T>::Zero(rows, cols);
    p->v = Matrix<T>::Zero(rows, cols);
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Parameter<T>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::kData, "unknown parameter '" + name + "'");
    return *params_[it->second];
  }
  const Parameter<T>& get(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->get(name);
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->grad.setZero();
  }

  long step() const { return step_; }
  void set_step(long s) { step_ = s; }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  long step_ = 0;
};

template <class T>
class Graph;

// Handle to a node of a Graph.
template <class T>
struct Expr {
  Graph<T>* graph = nullptr;
  int id = -1;

  const Matrix<T>& value() const { return graph->value(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  T scalar() const { return value()(0, 0); }
  bool valid() const { return graph != nullptr && id >= 0; }
};

// Tape of a single forward computation. Nodes are appended in topological
// order, so the backward pass is one sweep in reverse index order. A graph is
// single-use: a second backward() throws.
template <class T>
class Graph {
 public:
  using Mat = Matrix<T>;
  using Backward = std::function<void(Graph&, int)>;

  struct Node {
    const char* op = "";
    Mat value;
    Mat grad;
    Backward backward;
    Parameter<T>* param = nullptr;
    bool needs_grad = false;
    bool has_grad = false;
  };

  // With `track_gradients` false nothing needs a gradient, so no backward
  // closures are kept (inference).
  explicit Graph(bool track_gradients = true) : track_(track_gradients) { nodes_.reserve(256); }
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr<T> input(Mat value) {
    Node n;
    n.op = "input";
    n.value = std::move(value);
    return push(std::move(n));
  }

  Expr<T> scalar(T v) { return input(Mat::Constant(1, 1, v)); }

  // Leaf bound to a trainable parameter; repeated calls share one node.
  Expr<T> param(Parameter<T>& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return {this, it->second};
    Node n;
    n.op = "param";
    n.value = p.value;
    n.param = &p;
    n.needs_grad = track_;
    Expr<T> e = push(std::move(n));
    param_nodes_.emplace(&p, e.id);
    return e;
  }

  // Appends an operation result. `backward` is kept only when some parent
  // needs a gradient.
  Expr<T> record(const char* op, Mat value, std::initializer_list<Expr<T>> parents, Backward backward) {
    return record(op, std::move(value), std::vector<Expr<T>>(parents), std::move(backward));
  }

  Expr<T> record(const char* op, Mat value, const std::vector<Expr<T>>& parents, Backward backward) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    for (const auto& p : parents) {
      if (p.graph != this) throw Error(ErrorKind::kShapeMismatch, std::string(op) + ": operand from another graph");
      n.needs_grad = n.needs_grad || nodes_[static_cast<std::size_t>(p.id)].needs_grad;
    }
    if (n.needs_grad) n.backward = std::move(backward);
    return push(std::move(n));
  }

  const Mat& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Mat& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  const char* op(int id) const { return nodes_[static_cast<std::size_t>(id)].op; }
  std::size_t size() const { return nodes_.size(); }

  template <class Derived>
  void add_grad(int id, const Eigen::MatrixBase<Derived>& delta) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (n.has_grad) {
      n.grad += delta;
    } else {
      n.grad = delta;
      n.has_grad = true;
    }
  }

  // Reverse sweep from a scalar loss; parameter gradients are added into
  // their ParameterStore slots.
  void backward(Expr<T> loss) {
    if (consumed_) throw Error(ErrorKind::kGraphConsumed, "backward() already ran on this graph");
    if (loss.rows() != 1 || loss.cols() != 1) {
      throw Error(ErrorKind::kNonScalarLoss, "loss has shape " + shape_string(loss.rows(), loss.cols()));
    }
    consumed_ = true;
    if (!nodes_[static_cast<std::size_t>(loss.id)].needs_grad) return;
    add_grad(loss.id, Mat::Ones(1, 1));
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.has_grad) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param != nullptr) n.param->grad += n.grad;
    }
  }

  bool consumed() const { return consumed_; }

 private:
  Expr<T> push(Node n) {
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, int> param_nodes_;
  bool consumed_ = false;
  bool track_ = true;
};

}  // namespace ltl
