#pragma once

#include <cstdint>

#include "f2p/renderer/image.hpp"

namespace f2p::render {

/// Simulated photo-domain perturbation. Applies, in order, an integer
/// translation (edge replicated), Gaussian blur, contrast and brightness
/// changes and additive Gaussian noise, all drawn from `seed` and scaled by
/// `strength` in [0,1]. Strength 0 returns the input unchanged.
Image photo_shift(const Image& img, std::uint64_t seed, float strength);

}  // namespace f2p::render
