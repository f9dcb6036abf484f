#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace f2p::render {

inline constexpr std::size_t kImageSize = 64;
inline constexpr std::size_t kNumClasses = 7;

enum class Region : std::uint8_t { background = 0, skin, hair, brow, eye, nose, mouth };

/// Interleaved H×W×C raster with values in [0,1].
struct Image {
  std::size_t height = 0, width = 0, channels = 3;
  std::vector<float> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c = 3, float fill = 0.0f)
      : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

  float& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Per-pixel semantic class index.
struct LabelMap {
  std::size_t height = 0, width = 0;
  std::vector<std::uint8_t> classes;

  LabelMap() = default;
  LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), classes(h * w, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x) { return classes[y * width + x]; }
  std::uint8_t at(std::size_t y, std::size_t x) const { return classes[y * width + x]; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Mean absolute per-value difference; images must share dimensions.
double mean_abs_diff(const Image& a, const Image& b);

/// Center-crops to a square and resamples to size×size by area averaging.
Image center_crop_resize(const Image& img, std::size_t size = kImageSize);

/// Plurality vote over factor×factor blocks; ties go to the higher class index.
LabelMap downsample_labels(const LabelMap& labels, std::size_t factor);

}  // namespace f2p::render
