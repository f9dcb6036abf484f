#include "f2p/autodiff/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace f2p::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
BasicTensor<T>::BasicTensor() : BasicTensor(Shape{}, T(0)) {}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill, bool requires_grad)
    : impl_(std::make_shared<TensorImpl<T>>()) {
  for (auto d : shape)
    if (d == 0) throw Error("tensor dimensions must be positive: " + to_string(shape));
  impl_->data.assign(ad::numel(shape), fill);
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> values, bool requires_grad)
    : impl_(std::make_shared<TensorImpl<T>>()) {
  for (auto d : shape)
    if (d == 0) throw Error("tensor dimensions must be positive: " + to_string(shape));
  if (ad::numel(shape) != values.size())
    throw Error("shape " + to_string(shape) + " does not match " + std::to_string(values.size()) +
                " values");
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
  impl_->requires_grad = requires_grad;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
  return BasicTensor(Shape{}, value, requires_grad);
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
  if (axis >= rank()) throw Error("axis " + std::to_string(axis) + " out of range for shape " +
                                  to_string(shape()));
  return impl_->shape[axis];
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) throw Error("item() on tensor of shape " + to_string(shape()));
  return impl_->data[0];
}

template <typename T>
void BasicTensor<T>::set_requires_grad(bool value) {
  if (!is_leaf()) throw Error("requires_grad can only be changed on leaf tensors");
  impl_->requires_grad = value;
}

template <typename T>
std::span<const T> BasicTensor<T>::grad() const {
  if (!has_grad()) throw Error("tensor has no gradient");
  return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  if (has_grad()) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return BasicTensor(impl_->shape, impl_->data, false);
}

template <typename T>
Graph<T> Graph<T>::trace(const BasicTensor<T>& root) {
  Graph graph;
  std::unordered_set<const TensorImpl<T>*> visited;
  // Iterative post-order DFS; a frame is (tensor, next input index).
  std::vector<std::pair<std::shared_ptr<TensorImpl<T>>, std::size_t>> stack;
  stack.emplace_back(root.impl(), 0);
  visited.insert(root.impl().get());
  while (!stack.empty()) {
    auto& [tensor, next] = stack.back();
    const auto& fn = tensor->grad_fn;
    if (fn && next < fn->inputs.size()) {
      auto child = fn->inputs[next++];
      if (child->requires_grad && visited.insert(child.get()).second) stack.emplace_back(child, 0);
      continue;
    }
    graph.order_.push_back(tensor);
    stack.pop_back();
  }
  return graph;
}

template <typename T>
void Graph<T>::backward() {
  if (order_.empty()) return;
  for (auto& t : order_)
    if (t->grad_fn) t->grad.assign(t->data.size(), T(0));
  auto& root = order_.back();
  if (root->grad_fn) {
    std::fill(root->grad.begin(), root->grad.end(), T(1));
  } else {
    for (auto& g : root->grad_buffer()) g += T(1);
    return;
  }
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    auto& t = *it;
    if (t->grad_fn && t->grad_fn->backward) t->grad_fn->backward(*t);
  }
}

template <typename T>
void backward(const BasicTensor<T>& root) {
  if (root.numel() != 1)
    throw Error("backward() requires a scalar root, got shape " + to_string(root.shape()));
  if (!root.requires_grad()) throw Error("backward() root does not require grad");
  Graph<T>::trace(root).backward();
}

namespace detail {

template <typename T>
bool any_requires_grad(const std::vector<std::shared_ptr<TensorImpl<T>>>& inputs) {
  if (!g_grad_enabled) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const auto& t) { return t->requires_grad; });
}

template <typename T>
BasicTensor<T> make_result(Shape shape, std::vector<T> values, const char* op,
                           std::vector<std::shared_ptr<TensorImpl<T>>> inputs,
                           BackwardFn<T> backward_fn) {
  BasicTensor<T> out(std::move(shape), std::move(values));
  if (any_requires_grad(inputs)) {
    auto node = std::make_shared<Node<T>>();
    node->op = op;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward_fn);
    out.impl()->requires_grad = true;
    out.impl()->grad_fn = std::move(node);
  }
  return out;
}

}  // namespace detail

#define F2P_INSTANTIATE(T)                                                                   \
  template class BasicTensor<T>;                                                             \
  template class Graph<T>;                                                                   \
  template void backward<T>(const BasicTensor<T>&);                                          \
  template bool detail::any_requires_grad<T>(const std::vector<std::shared_ptr<TensorImpl<T>>>&); \
  template BasicTensor<T> detail::make_result<T>(Shape, std::vector<T>, const char*,         \
                                                 std::vector<std::shared_ptr<TensorImpl<T>>>, \
                                                 BackwardFn<T>);

F2P_INSTANTIATE(float)
F2P_INSTANTIATE(double)

}  // namespace f2p::ad
