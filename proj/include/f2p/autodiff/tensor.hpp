#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "f2p/error.hpp"

namespace f2p::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

template <typename T>
struct TensorImpl;

/// Receives the op's output (values and populated gradient) and accumulates
/// into the gradients of the inputs that require one.
template <typename T>
using BackwardFn = std::function<void(const TensorImpl<T>& out)>;

/// One recorded operation.
template <typename T>
struct Node {
  std::string op;
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  BackwardFn<T> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first written
  bool requires_grad = false;
  std::shared_ptr<Node<T>> grad_fn;

  std::vector<T>& grad_buffer() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    return grad;
  }
};

/// Dense row-major tensor handle. Copies share storage; use `detach()` for
/// an independent value copy.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor();
  explicit BasicTensor(Shape shape, T fill = T(0), bool requires_grad = false);
  BasicTensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static BasicTensor scalar(T value, bool requires_grad = false);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return impl_->data.size(); }

  std::span<T> data() { return impl_->data; }
  std::span<const T> data() const { return impl_->data; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value);
  bool is_leaf() const { return impl_->grad_fn == nullptr; }
  bool has_grad() const { return impl_->grad.size() == impl_->data.size(); }
  std::span<const T> grad() const;
  std::span<T> mutable_grad() { return impl_->grad_buffer(); }
  void zero_grad();

  /// Value copy without graph history.
  BasicTensor detach() const;

  const std::shared_ptr<TensorImpl<T>>& impl() const { return impl_; }
  explicit BasicTensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl<T>> impl_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Tensors reachable from a root, in topological order (inputs first).
template <typename T>
class Graph {
 public:
  static Graph trace(const BasicTensor<T>& root);

  std::span<const std::shared_ptr<TensorImpl<T>>> nodes() const { return order_; }

  /// Reverse-mode sweep. Intermediate gradients are reset, the root is seeded
  /// with ones and leaves accumulate into their existing gradients.
  void backward();

 private:
  std::vector<std::shared_ptr<TensorImpl<T>>> order_;
};

template <typename T>
void backward(const BasicTensor<T>& root);

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {

/// Wraps freshly computed output values into a tensor and, when any input
/// requires a gradient and recording is enabled, attaches a graph node.
template <typename T>
BasicTensor<T> make_result(Shape shape, std::vector<T> values, const char* op,
                           std::vector<std::shared_ptr<TensorImpl<T>>> inputs,
                           BackwardFn<T> backward_fn);

template <typename T>
bool any_requires_grad(const std::vector<std::shared_ptr<TensorImpl<T>>>& inputs);

}  // namespace detail

}  // namespace f2p::ad
