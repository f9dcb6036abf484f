#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "f2p/autodiff/tensor.hpp"

namespace f2p::ad {

// Elementwise arithmetic. Operands must have identical shapes.
template <typename T> BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> scale(const BasicTensor<T>& a, T factor);

template <typename T> BasicTensor<T> sum(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> mean(const BasicTensor<T>& a);

template <typename T> BasicTensor<T> reshape(const BasicTensor<T>& a, Shape shape);
/// Half-open range [begin, end) along `axis`.
template <typename T>
BasicTensor<T> slice(const BasicTensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end);
template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, std::size_t axis);

/// features N×C×H×W times weights N×1×H×W, broadcast over channels.
template <typename T>
BasicTensor<T> mul_channels(const BasicTensor<T>& features, const BasicTensor<T>& weights);

template <typename T> BasicTensor<T> relu(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> sigmoid(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> softmax(const BasicTensor<T>& a, std::size_t axis);
template <typename T> BasicTensor<T> log_softmax(const BasicTensor<T>& a, std::size_t axis);

/// Square window max pooling over the two trailing axes of an NCHW tensor.
template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x, std::size_t window, std::size_t stride);

/// x: N×in, weight: out×in, bias: out.
template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias);

/// x: N×C×H×W, weight: O×C×k×k, bias: O.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, std::size_t stride, std::size_t padding);

/// Adjoint of conv2d. x: N×C×H×W, weight: C×O×k×k (same layout a conv2d from
/// O to C channels would use), bias: O.
template <typename T>
BasicTensor<T> conv2d_transpose(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                const BasicTensor<T>& bias, std::size_t stride,
                                std::size_t padding);

enum class Mode { train, eval };

template <typename T>
struct RunningStats {
  BasicTensor<T> mean;
  BasicTensor<T> var;
};

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEpsilon = 1e-5;

/// Per-channel normalization over every axis except 1. In train mode the
/// batch statistics are used and `stats` is updated as
/// running = 0.9 * running + 0.1 * batch; eval mode reads `stats` only.
template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                          const BasicTensor<T>& beta, RunningStats<T>& stats, Mode mode);

/// Mean absolute difference. The subgradient at a tie is 0.
template <typename T> BasicTensor<T> l1_loss(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// <a,b> / sqrt(|a|^2 |b|^2) over all elements.
template <typename T> BasicTensor<T> cosine(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Mean negative log-likelihood. `log_probs` is N×C×(spatial...), `labels`
/// holds one class per N×(spatial...) position in row-major order.
template <typename T>
BasicTensor<T> nll_loss(const BasicTensor<T>& log_probs, std::span<const std::int32_t> labels);

template <typename T>
BasicTensor<T> cross_entropy(const BasicTensor<T>& logits, std::span<const std::int32_t> labels) {
  return nll_loss(log_softmax(logits, 1), labels);
}

}  // namespace f2p::ad
