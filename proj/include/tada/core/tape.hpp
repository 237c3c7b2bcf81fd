#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tada/core/tensor.hpp"

namespace tada {

/// A trainable tensor owned by a module. The tape writes its gradient back
/// into `grad` at the end of every backward pass.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {}

  std::size_t numel() const { return value.numel(); }
};

template <class T>
class Tape;

/// Handle to a value recorded on a tape.
template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape(); }
  std::size_t dim(std::size_t axis) const { return value().dim(axis); }
  const Tensor<T>& grad() const { return tape->grad(id); }
};

/// Records primitive applications in execution order and replays them in
/// reverse to accumulate gradients.
///
/// Nodes live in a deque so references handed to backward closures stay
/// valid while later nodes are appended. A tape is single-threaded.
template <class T>
class Tape {
 public:
  /// Backward closure: reads the node's output gradient and accumulates
  /// into the gradients of its inputs via `accumulate`.
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(Tensor<T> value, bool requires_grad = false) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, {}, nullptr, nullptr});
    return {this, nodes_.size() - 1};
  }

  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  /// Leaf bound to a module parameter; backward writes the gradient back.
  Var<T> parameter(Parameter<T>& p) {
    nodes_.push_back(Node{p.value, {}, true, {}, nullptr, &p});
    return {this, nodes_.size() - 1};
  }

  Var<T> record(Tensor<T> value, std::vector<std::size_t> inputs, BackwardFn backward) {
    bool needs = false;
    for (std::size_t i : inputs) needs = needs || nodes_.at(i).requires_grad;
    nodes_.push_back(Node{std::move(value), {}, needs, std::move(inputs),
                          needs ? std::move(backward) : BackwardFn{}, nullptr});
    return {this, nodes_.size() - 1};
  }

  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  const Tensor<T>& grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (n.grad.empty() && n.value.numel() != 0) {
      throw UsageError("tape: no gradient recorded for node " + std::to_string(id));
    }
    return n.grad;
  }

  void accumulate(std::size_t id, const Tensor<T>& g) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return;
    n.grad += g;
  }

  /// Direct access for kernels that scatter into an input gradient.
  Tensor<T>* grad_buffer(std::size_t id) {
    Node& n = nodes_.at(id);
    return n.requires_grad ? &n.grad : nullptr;
  }

  /// Reverse-mode sweep from a scalar loss. Every grad-requiring leaf
  /// (and bound parameter) receives dLoss/dLeaf; unreachable leaves get 0.
  void backward(Var<T> loss) {
    if (loss.tape != this) throw UsageError("backward: loss belongs to another tape");
    if (value(loss.id).numel() != 1) {
      throw UsageError("backward: loss must be scalar, got shape " +
                       shape_str(value(loss.id).shape()));
    }
    for (std::size_t i = 0; i <= loss.id; ++i) {
      Node& n = nodes_[i];
      n.grad = n.requires_grad ? Tensor<T>::zeros(n.value.shape()) : Tensor<T>{};
    }
    if (!nodes_[loss.id].requires_grad) {
      nodes_[loss.id].grad = Tensor<T>::zeros(nodes_[loss.id].value.shape());
    }
    nodes_[loss.id].grad.data()[0] = T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.requires_grad && n.backward) n.backward(*this, n.grad);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (!n.param) continue;
      n.param->grad = i <= loss.id ? n.grad : Tensor<T>::zeros(n.value.shape());
    }
  }

  /// Smallest distance to a non-differentiable point (ReLU at 0, max-pool
  /// ties) seen by any op recorded so far. Used by finite-difference checks.
  double kink_margin() const noexcept { return kink_margin_; }
  void note_kink(double margin) noexcept {
    if (margin < kink_margin_) kink_margin_ = margin;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
  };

  std::deque<Node> nodes_;
  double kink_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace tada
