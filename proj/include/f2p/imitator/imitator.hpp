#pragma once

#include <array>
#include <cstdint>

#include "f2p/autodiff/nn.hpp"
#include "f2p/renderer/schema.hpp"

namespace f2p::imitator {

/// Transposed-convolution generator mapping a 34-d parameter vector to a
/// 3×64×64 image: 1→4→8→16→32→64 with BN+ReLU between layers and a linear
/// output.
template <typename T>
class ImitatorNet {
 public:
  static constexpr std::array<std::size_t, 6> kChannels{render::kDimension, 256, 128, 64, 32, 3};

  explicit ImitatorNet(std::uint64_t seed = 0) {
    ad::Rng rng(seed);
    for (std::size_t i = 0; i < 5; ++i) {
      const bool first = i == 0;
      up_[i] = ad::ConvTranspose2d<T>(kChannels[i], kChannels[i + 1], 4, first ? 1 : 2, first ? 0 : 1, rng);
      if (i < 4) bn_[i] = ad::BatchNorm<T>(kChannels[i + 1]);
    }
  }

  /// `x` is N×34 (or N×34×1×1); returns N×3×64×64, unclamped.
  ad::BasicTensor<T> forward(const ad::BasicTensor<T>& x, ad::Mode mode) const {
    auto h = x.rank() == 4 ? x : ad::reshape(x, ad::Shape{x.dim(0), render::kDimension, 1, 1});
    for (std::size_t i = 0; i < 4; ++i) h = ad::relu(bn_[i](up_[i](h), mode));
    return up_[4](h);
  }

  ad::StateList<T> state() const {
    ad::StateList<T> out;
    for (std::size_t i = 0; i < 5; ++i) {
      up_[i].collect("up" + std::to_string(i), out);
      if (i < 4) bn_[i].collect("bn" + std::to_string(i), out);
    }
    return out;
  }

 private:
  std::array<ad::ConvTranspose2d<T>, 5> up_;
  std::array<ad::BatchNorm<T>, 4> bn_;
};

}  // namespace f2p::imitator
