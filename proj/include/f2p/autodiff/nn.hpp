#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "f2p/autodiff/ops.hpp"

namespace f2p::ad {

/// A tensor that belongs to a network's persistent state. Trainable entries
/// are optimized; the rest (running statistics) are only checkpointed.
template <typename T>
struct NamedTensor {
  std::string name;
  BasicTensor<T> tensor;
  bool trainable = true;
};

template <typename T>
using StateList = std::vector<NamedTensor<T>>;

using Rng = std::mt19937_64;

template <typename T>
void fill_uniform(BasicTensor<T>& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
}

template <typename T>
struct Conv2d {
  BasicTensor<T> weight, bias;
  std::size_t stride = 1, padding = 0;

  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
         std::size_t padding_, Rng& rng)
      : weight(Shape{out, in, kernel, kernel}, T(0), true),
        bias(Shape{out}, T(0), true),
        stride(stride_),
        padding(padding_) {
    fill_uniform(weight, std::sqrt(6.0 / static_cast<double>(in * kernel * kernel)), rng);
  }

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    return conv2d(x, weight, bias, stride, padding);
  }

  void collect(const std::string& prefix, StateList<T>& out) const {
    out.push_back({prefix + ".weight", weight, true});
    out.push_back({prefix + ".bias", bias, true});
  }
};

template <typename T>
struct ConvTranspose2d {
  BasicTensor<T> weight, bias;
  std::size_t stride = 1, padding = 0;

  ConvTranspose2d() = default;
  ConvTranspose2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
                  std::size_t padding_, Rng& rng)
      : weight(Shape{in, out, kernel, kernel}, T(0), true),
        bias(Shape{out}, T(0), true),
        stride(stride_),
        padding(padding_) {
    // Each output pixel receives in·(k/stride)² contributions.
    const double taps = static_cast<double>(kernel * kernel) / static_cast<double>(stride * stride);
    fill_uniform(weight, std::sqrt(6.0 / (static_cast<double>(in) * taps)), rng);
  }

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    return conv2d_transpose(x, weight, bias, stride, padding);
  }

  void collect(const std::string& prefix, StateList<T>& out) const {
    out.push_back({prefix + ".weight", weight, true});
    out.push_back({prefix + ".bias", bias, true});
  }
};

template <typename T>
struct BatchNorm {
  BasicTensor<T> gamma, beta;
  mutable RunningStats<T> stats;

  BatchNorm() = default;
  explicit BatchNorm(std::size_t channels)
      : gamma(Shape{channels}, T(1), true),
        beta(Shape{channels}, T(0), true),
        stats{BasicTensor<T>(Shape{channels}, T(0)), BasicTensor<T>(Shape{channels}, T(1))} {}

  BasicTensor<T> operator()(const BasicTensor<T>& x, Mode mode) const {
    return batch_norm(x, gamma, beta, stats, mode);
  }

  void collect(const std::string& prefix, StateList<T>& out) const {
    out.push_back({prefix + ".gamma", gamma, true});
    out.push_back({prefix + ".beta", beta, true});
    out.push_back({prefix + ".running_mean", stats.mean, false});
    out.push_back({prefix + ".running_var", stats.var, false});
  }
};

template <typename T>
struct Linear {
  BasicTensor<T> weight, bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng)
      : weight(Shape{out, in}, T(0), true), bias(Shape{out}, T(0), true) {
    fill_uniform(weight, std::sqrt(3.0 / static_cast<double>(in)), rng);
  }

  BasicTensor<T> operator()(const BasicTensor<T>& x) const { return linear(x, weight, bias); }

  void collect(const std::string& prefix, StateList<T>& out) const {
    out.push_back({prefix + ".weight", weight, true});
    out.push_back({prefix + ".bias", bias, true});
  }
};

/// Toggles requires_grad on every trainable entry.
template <typename T>
void set_trainable(const StateList<T>& state, bool trainable) {
  for (const auto& entry : state)
    if (entry.trainable) {
      auto t = entry.tensor;
      t.set_requires_grad(trainable);
    }
}

/// Clears requires_grad on every parameter of `net` so inference records no
/// weight gradients.
template <typename Net>
void freeze(const Net& net) {
  const auto state = net.state();
  for (const auto& e : state)
    if (e.tensor.requires_grad()) {
      set_trainable(state, false);
      return;
    }
}

/// Copies values between two state lists with identical names and shapes,
/// converting the scalar type. Throws naming the first mismatched entry.
template <typename From, typename To>
void copy_state(const StateList<From>& src, const StateList<To>& dst) {
  if (src.size() != dst.size())
    throw Error("state size mismatch: " + std::to_string(src.size()) + " vs " +
                std::to_string(dst.size()));
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].tensor.shape() != dst[i].tensor.shape())
      throw Error("state mismatch at tensor '" + dst[i].name + "'");
    auto to = dst[i].tensor;
    auto from = src[i].tensor.data();
    auto out = to.data();
    for (std::size_t k = 0; k < from.size(); ++k) out[k] = static_cast<To>(from[k]);
  }
}

/// Stochastic gradient descent with classical momentum:
/// v <- momentum·v + g;  p <- p − lr·v.
template <typename T>
class Sgd {
 public:
  Sgd(StateList<T> state, double momentum) : momentum_(momentum) {
    for (auto& entry : state)
      if (entry.trainable) {
        params_.push_back(entry.tensor);
        velocity_.emplace_back(entry.tensor.numel(), T(0));
      }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step(double lr) {
    const T m = static_cast<T>(momentum_), rate = static_cast<T>(lr);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = params_[k];
      if (!p.has_grad()) continue;
      auto g = p.grad();
      auto v = std::span<T>(velocity_[k]);
      auto d = p.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        v[i] = m * v[i] + g[i];
        d[i] -= rate * v[i];
      }
    }
  }

 private:
  double momentum_;
  std::vector<BasicTensor<T>> params_;
  std::vector<std::vector<T>> velocity_;
};

}  // namespace f2p::ad
