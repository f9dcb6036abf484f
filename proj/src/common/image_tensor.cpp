#include "f2p/common/image_tensor.hpp"

#include <algorithm>

namespace f2p {

template <typename T>
ad::BasicTensor<T> images_to_tensor(std::span<const render::Image* const> images) {
  if (images.empty()) throw Error("images_to_tensor: empty batch");
  const auto& first = *images.front();
  const std::size_t h = first.height, w = first.width, c = first.channels, plane = h * w;
  ad::BasicTensor<T> out(ad::Shape{images.size(), c, h, w});
  auto data = out.data();
  for (std::size_t n = 0; n < images.size(); ++n) {
    const auto& img = *images[n];
    if (img.height != h || img.width != w || img.channels != c)
      throw Error("images_to_tensor: images differ in size");
    T* dst = data.data() + n * c * plane;
    for (std::size_t p = 0; p < plane; ++p)
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch * plane + p] = static_cast<T>(img.pixels[p * c + ch]);
  }
  return out;
}

template <typename T>
render::Image tensor_to_image(const ad::BasicTensor<T>& t, std::size_t n, bool clamp) {
  if (t.rank() != 4 || n >= t.dim(0)) throw Error("tensor_to_image: expected N×C×H×W with n < N");
  const std::size_t c = t.dim(1), h = t.dim(2), w = t.dim(3), plane = h * w;
  render::Image img(h, w, c);
  const T* src = t.data().data() + n * c * plane;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const auto v = static_cast<float>(src[ch * plane + p]);
      img.pixels[p * c + ch] = clamp ? std::clamp(v, 0.0f, 1.0f) : v;
    }
  return img;
}

template <typename T>
ad::BasicTensor<T> params_to_tensor(std::span<const render::ParamVector* const> params) {
  ad::BasicTensor<T> out(ad::Shape{params.size(), render::kDimension});
  auto data = out.data();
  for (std::size_t n = 0; n < params.size(); ++n)
    for (std::size_t i = 0; i < render::kDimension; ++i)
      data[n * render::kDimension + i] = static_cast<T>(params[n]->values[i]);
  return out;
}

#define F2P_INSTANTIATE_CONVERT(T)                                                               \
  template ad::BasicTensor<T> images_to_tensor<T>(std::span<const render::Image* const>);       \
  template render::Image tensor_to_image<T>(const ad::BasicTensor<T>&, std::size_t, bool);      \
  template ad::BasicTensor<T> params_to_tensor<T>(std::span<const render::ParamVector* const>);

F2P_INSTANTIATE_CONVERT(float)
F2P_INSTANTIATE_CONVERT(double)

}  // namespace f2p
