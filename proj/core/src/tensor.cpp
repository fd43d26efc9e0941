#include "memtrack/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "memtrack/error.hpp"

namespace memtrack {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <class T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    throw ContractViolation("tensor: shape " + shape_string(shape) + " does not match " +
                            std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<NodeType>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <class T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value, bool requires_grad) {
  const std::size_t n = numel(shape);
  return BasicTensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
  return BasicTensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::vector(std::vector<T> values, bool requires_grad) {
  Shape shape{values.size()};
  return BasicTensor(std::move(shape), std::move(values), requires_grad);
}

template <class T>
const Shape& BasicTensor<T>::shape() const {
  MEMTRACK_EXPECTS(node_, "tensor: undefined");
  return node_->shape;
}

template <class T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
  MEMTRACK_EXPECTS(axis < rank(), "tensor: axis out of range");
  return node_->shape[axis];
}

template <class T>
std::size_t BasicTensor<T>::size() const {
  return node_ ? node_->value.size() : 0;
}

template <class T>
std::span<const T> BasicTensor<T>::data() const& {
  MEMTRACK_EXPECTS(node_, "tensor: undefined");
  return node_->value;
}

template <class T>
std::span<T> BasicTensor<T>::mutable_data() {
  MEMTRACK_EXPECTS(node_, "tensor: undefined");
  MEMTRACK_EXPECTS(is_leaf(), "tensor: only leaves may be written in place");
  return node_->value;
}

template <class T>
T BasicTensor<T>::item() const {
  MEMTRACK_EXPECTS(size() == 1, "tensor: item() needs exactly one element, have " +
                                    shape_string(shape()));
  return node_->value[0];
}

template <class T>
T BasicTensor<T>::at(std::size_t flat_index) const {
  MEMTRACK_EXPECTS(flat_index < size(), "tensor: index out of range");
  return node_->value[flat_index];
}

template <class T>
bool BasicTensor<T>::requires_grad() const {
  return node_ && node_->requires_grad;
}

template <class T>
bool BasicTensor<T>::is_leaf() const {
  return node_ && node_->inputs.empty();
}

template <class T>
std::span<const T> BasicTensor<T>::grad() const& {
  MEMTRACK_EXPECTS(node_, "tensor: undefined");
  return node_->grad_buffer();
}

template <class T>
void BasicTensor<T>::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <class T>
BasicTensor<T> BasicTensor<T>::detach() const {
  MEMTRACK_EXPECTS(node_, "tensor: undefined");
  if (!node_->requires_grad) return *this;
  return BasicTensor(node_->shape, node_->value, false);
}

template <class T>
BasicTensor<T> BasicTensor<T>::clone(bool requires_grad) const {
  MEMTRACK_EXPECTS(node_, "tensor: undefined");
  return BasicTensor(node_->shape, node_->value, requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::from_node(std::shared_ptr<NodeType> node) {
  BasicTensor t;
  t.node_ = std::move(node);
  return t;
}

template <class T>
std::vector<detail::Node<T>*> topological_order(const BasicTensor<T>& root) {
  using Node = detail::Node<T>;
  std::vector<Node*> order;
  if (!root.defined()) return order;
  std::unordered_set<const Node*> visited;
  // Iterative post-order DFS; the bool marks "children already expanded".
  std::vector<std::pair<Node*, bool>> stack;
  stack.emplace_back(root.node().get(), false);
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(node);
      continue;
    }
    if (!visited.insert(node).second) continue;
    stack.emplace_back(node, true);
    for (auto it = node->inputs.rbegin(); it != node->inputs.rend(); ++it) {
      if ((*it)->requires_grad && !visited.count(it->get())) stack.emplace_back(it->get(), false);
    }
  }
  return order;
}

template <class T>
void backward(const BasicTensor<T>& loss) {
  MEMTRACK_EXPECTS(loss.defined(), "backward: undefined loss");
  MEMTRACK_EXPECTS(loss.size() == 1,
                   "backward: loss must be scalar, got shape " + shape_string(loss.shape()));
  if (!loss.requires_grad()) return;
  auto order = topological_order(loss);
  auto& seed = loss.node()->grad_buffer();
  seed[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node<T>& node = **it;
    if (node.backward && node.grad.size() == node.value.size()) node.backward(node);
  }
}

template <class To, class From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t, bool requires_grad) {
  std::vector<To> values(t.data().begin(), t.data().end());
  return BasicTensor<To>(t.shape(), std::move(values), requires_grad);
}

namespace detail {

template <class T>
BasicTensor<T> make_result(Shape shape, std::vector<T> value, std::vector<BasicTensor<T>> inputs,
                           std::function<void(Node<T>&)> rule) {
  for (const T v : value) {
    if (!std::isfinite(v)) throw ContractViolation("tensor: operation produced a non-finite value");
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (grad_enabled()) {
    const bool any = std::any_of(inputs.begin(), inputs.end(),
                                 [](const BasicTensor<T>& in) { return in.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (auto& in : inputs) node->inputs.push_back(in.node());
      node->backward = std::move(rule);
    }
  }
  return BasicTensor<T>::from_node(std::move(node));
}

template BasicTensor<float> make_result(Shape, std::vector<float>, std::vector<BasicTensor<float>>,
                                        std::function<void(Node<float>&)>);
template BasicTensor<double> make_result(Shape, std::vector<double>,
                                         std::vector<BasicTensor<double>>,
                                         std::function<void(Node<double>&)>);

}  // namespace detail

template class BasicTensor<float>;
template class BasicTensor<double>;
template void backward(const BasicTensor<float>&);
template void backward(const BasicTensor<double>&);
template std::vector<detail::Node<float>*> topological_order(const BasicTensor<float>&);
template std::vector<detail::Node<double>*> topological_order(const BasicTensor<double>&);
template BasicTensor<double> tensor_cast(const BasicTensor<float>&, bool);
template BasicTensor<float> tensor_cast(const BasicTensor<double>&, bool);
template BasicTensor<float> tensor_cast(const BasicTensor<float>&, bool);
template BasicTensor<double> tensor_cast(const BasicTensor<double>&, bool);

}  // namespace memtrack
