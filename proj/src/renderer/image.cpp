#include "f2p/renderer/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "f2p/error.hpp"

namespace f2p::render {

double mean_abs_diff(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels)
    throw Error("mean_abs_diff: image dimensions differ");
  double acc = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) acc += std::abs(double(a.pixels[i]) - b.pixels[i]);
  return a.pixels.empty() ? 0.0 : acc / static_cast<double>(a.pixels.size());
}

Image center_crop_resize(const Image& img, std::size_t size) {
  if (img.height == 0 || img.width == 0) throw Error("center_crop_resize: empty image");
  const std::size_t side = std::min(img.height, img.width);
  const std::size_t y0 = (img.height - side) / 2, x0 = (img.width - side) / 2;
  if (side == size) {
    Image out(size, size, img.channels);
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x)
        for (std::size_t c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
  }
  // Box filter: each output pixel averages the source area it covers.
  Image out(size, size, img.channels);
  const double scale = static_cast<double>(side) / static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double sy0 = y * scale, sy1 = (y + 1) * scale, sx0 = x * scale, sx1 = (x + 1) * scale;
      for (std::size_t c = 0; c < img.channels; ++c) {
        double acc = 0, area = 0;
        for (auto sy = static_cast<std::size_t>(sy0); sy < std::min<double>(std::ceil(sy1), side); ++sy)
          for (auto sx = static_cast<std::size_t>(sx0); sx < std::min<double>(std::ceil(sx1), side); ++sx) {
            const double wy = std::min<double>(sy + 1, sy1) - std::max<double>(sy, sy0);
            const double wx = std::min<double>(sx + 1, sx1) - std::max<double>(sx, sx0);
            if (wy <= 0 || wx <= 0) continue;
            acc += wy * wx * img.at(y0 + sy, x0 + sx, c);
            area += wy * wx;
          }
        out.at(y, x, c) = static_cast<float>(acc / area);
      }
    }
  return out;
}

LabelMap downsample_labels(const LabelMap& labels, std::size_t factor) {
  if (factor == 0 || labels.height % factor || labels.width % factor)
    throw Error("downsample_labels: size must be divisible by the factor");
  LabelMap out(labels.height / factor, labels.width / factor);
  for (std::size_t by = 0; by < out.height; ++by)
    for (std::size_t bx = 0; bx < out.width; ++bx) {
      std::array<int, 256> votes{};
      for (std::size_t y = 0; y < factor; ++y)
        for (std::size_t x = 0; x < factor; ++x) ++votes[labels.at(by * factor + y, bx * factor + x)];
      int best = 0;
      for (int c = 1; c < 256; ++c)
        if (votes[c] >= votes[best] && votes[c] > 0) best = c;
      out.at(by, bx) = static_cast<std::uint8_t>(best);
    }
  return out;
}

}  // namespace f2p::render
