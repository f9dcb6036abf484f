#pragma once

#include <span>
#include <vector>

#include "f2p/autodiff/tensor.hpp"
#include "f2p/renderer/image.hpp"
#include "f2p/renderer/schema.hpp"

namespace f2p {

/// Stacks images (HWC) into an N×C×H×W tensor.
template <typename T = float>
ad::BasicTensor<T> images_to_tensor(std::span<const render::Image* const> images);

template <typename T = float>
ad::BasicTensor<T> image_to_tensor(const render::Image& img) {
  const render::Image* ptr = &img;
  return images_to_tensor<T>(std::span<const render::Image* const>(&ptr, 1));
}

/// Extracts sample `n` of an N×3×H×W tensor, optionally clamping to [0,1].
template <typename T = float>
render::Image tensor_to_image(const ad::BasicTensor<T>& t, std::size_t n = 0, bool clamp = true);

/// Stacks parameter vectors into N×34.
template <typename T = float>
ad::BasicTensor<T> params_to_tensor(std::span<const render::ParamVector* const> params);

}  // namespace f2p
