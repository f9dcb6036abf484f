#include "f2p/renderer/photo_shift.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "f2p/renderer/seed.hpp"

namespace f2p::render {

namespace {

Image translate(const Image& img, int dx, int dy) {
  Image out(img.height, img.width, img.channels);
  const int h = static_cast<int>(img.height), w = static_cast<int>(img.width);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto sy = static_cast<std::size_t>(std::clamp(y - dy, 0, h - 1));
      const auto sx = static_cast<std::size_t>(std::clamp(x - dx, 0, w - 1));
      for (std::size_t c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  return out;
}

Image blur(const Image& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& k : kernel) k /= total;

  const int h = static_cast<int>(img.height), w = static_cast<int>(img.width);
  Image tmp(img.height, img.width, img.channels), out(img.height, img.width, img.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.at(y, std::clamp(x + i, 0, w - 1), c);
        tmp.at(y, x, c) = static_cast<float>(acc);
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(std::clamp(y + i, 0, h - 1), x, c);
        out.at(y, x, c) = static_cast<float>(acc);
      }
  return out;
}

}  // namespace

Image photo_shift(const Image& img, std::uint64_t seed, float strength) {
  if (strength <= 0.0f) return img;
  const double s = std::min(strength, 1.0f);
  std::mt19937_64 rng(splitmix64(seed ^ 0x70686f746f736866ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);

  const int shift = static_cast<int>(std::lround(2.0 * s));
  std::uniform_int_distribution<int> offset(-shift, shift);
  const int dx = offset(rng), dy = offset(rng);
  const double sigma = 1.5 * s * unit(rng);
  const double contrast = 1.0 + 0.25 * s * sym(rng);
  const double brightness = 1.0 + 0.2 * s * sym(rng);
  const double noise = 0.03 * s * unit(rng);

  Image out = translate(img, dx, dy);
  if (sigma > 0.05) out = blur(out, sigma);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : out.pixels) {
    double x = ((v - 0.5) * contrast + 0.5) * brightness + noise * gauss(rng);
    v = static_cast<float>(std::clamp(x, 0.0, 1.0));
  }
  return out;
}

}  // namespace f2p::render
