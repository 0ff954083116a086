#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "simi/tensor.hpp"

namespace simi::nn {

/// One vertex of the reverse-mode graph. Nodes that do not require a
/// gradient keep no parents, so inference graphs release intermediates as
/// soon as the last Var referencing them goes away.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads `self.grad` and accumulates into the parents' gradient buffers.
  std::function<void(Node& self)> backward;

  /// Gradient buffer, zero-initialised on first use.
  Tensor<T>& grad_buffer() {
    if (grad.empty()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  /// Leaf holding `value`.
  static Var leaf(Tensor<T> value, bool requires_grad = false);

  const Tensor<T>& value() const { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool valid() const { return node_ != nullptr; }

  Node<T>& node() const { return *node_; }
  const std::shared_ptr<Node<T>>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Builds an op result. `backward` is kept only when some input requires a
/// gradient; it receives the output node and must accumulate into the
/// parents' `grad_buffer()` for those parents that require grad.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward);

/// Reverse pass from a scalar. Every reachable node that requires a gradient
/// ends up holding d(loss)/d(node), summed over fan-out. Throws
/// NonScalarLoss when `loss` has more than one element.
template <typename T>
void backward(const Var<T>& loss);

}  // namespace simi::nn
