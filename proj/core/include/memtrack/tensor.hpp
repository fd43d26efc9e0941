#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace memtrack {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

// One record of the computation graph. The value is fixed once created;
// the gradient buffer is allocated lazily on first accumulation.
template <class T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<T>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor with reverse-mode differentiation.
///
/// A tensor is a cheap handle onto a shared graph node. Operations in ops.hpp
/// create new nodes; when gradient recording is enabled and any input
/// requires a gradient, the new node remembers its inputs and a backward rule.
/// Leaves created with `requires_grad = true` are the trainable parameters.
template <class T>
class BasicTensor {
 public:
  using value_type = T;
  using NodeType = detail::Node<T>;

  BasicTensor() = default;
  BasicTensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor scalar(T value, bool requires_grad = false);
  static BasicTensor vector(std::vector<T> values, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  // Views into the node: never take them from a temporary tensor.
  std::span<const T> data() const&;
  std::span<const T> data() const&& = delete;
  /// Writable view of a leaf's storage. Used by optimizers and gradient
  /// checks; throws for interior graph nodes.
  std::span<T> mutable_data();
  T item() const;
  T at(std::size_t flat_index) const;

  bool requires_grad() const;
  bool is_leaf() const;
  /// Accumulated gradient; zeros if nothing has flowed into this tensor.
  std::span<const T> grad() const&;
  std::span<const T> grad() const&& = delete;
  void zero_grad();

  /// Same values, cut from the graph.
  BasicTensor detach() const;
  /// Deep copy of the values into a fresh leaf.
  BasicTensor clone(bool requires_grad = false) const;

  const std::shared_ptr<NodeType>& node() const { return node_; }
  static BasicTensor from_node(std::shared_ptr<NodeType> node);

 private:
  std::shared_ptr<NodeType> node_;
};

using Tensor = BasicTensor<float>;
using Tensord = BasicTensor<double>;

/// Whether newly created operations record a backward rule (thread-local).
bool grad_enabled();

/// Disables graph recording for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Back-propagates from a scalar loss into every reachable leaf that requires
/// a gradient. Gradients accumulate; call zero_grad on leaves between passes.
template <class T>
void backward(const BasicTensor<T>& loss);

/// Topologically ordered nodes reachable from `root` (inputs first).
template <class T>
std::vector<detail::Node<T>*> topological_order(const BasicTensor<T>& root);

template <class To, class From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t, bool requires_grad);

namespace detail {

// Builds the result of an operation. Records `inputs` and `rule` only when
// gradient recording is on and some input needs a gradient.
template <class T>
BasicTensor<T> make_result(Shape shape, std::vector<T> value,
                           std::vector<BasicTensor<T>> inputs,
                           std::function<void(Node<T>&)> rule);

}  // namespace detail

}  // namespace memtrack
