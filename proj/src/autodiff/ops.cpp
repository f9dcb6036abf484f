#include "f2p/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace f2p::ad {

namespace {

template <typename T>
using Impl = std::shared_ptr<TensorImpl<T>>;

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b)
    throw Error(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size())
    throw Error("axis " + std::to_string(axis) + " out of range for " + to_string(shape));
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

template <typename T>
T sign(T v) {
  return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

}  // namespace

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  Impl<T> ai = a.impl(), bi = b.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "add", {ai, bi},
                                [ai, bi](const TensorImpl<T>& o) {
                                  for (auto* in : {ai.get(), bi.get()}) {
                                    if (!in->requires_grad) continue;
                                    auto& g = in->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                                  }
                                });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  Impl<T> ai = a.impl(), bi = b.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "sub", {ai, bi},
                                [ai, bi](const TensorImpl<T>& o) {
                                  if (ai->requires_grad) {
                                    auto& g = ai->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                                  }
                                  if (bi->requires_grad) {
                                    auto& g = bi->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
                                  }
                                });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  Impl<T> ai = a.impl(), bi = b.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "mul", {ai, bi},
                                [ai, bi](const TensorImpl<T>& o) {
                                  if (ai->requires_grad) {
                                    auto& g = ai->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i)
                                      g[i] += o.grad[i] * bi->data[i];
                                  }
                                  if (bi->requires_grad) {
                                    auto& g = bi->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i)
                                      g[i] += o.grad[i] * ai->data[i];
                                  }
                                });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  Impl<T> ai = a.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "scale", {ai},
                                [ai, factor](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * factor;
                                });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& a) {
  T total = 0;
  for (T v : a.data()) total += v;
  Impl<T> ai = a.impl();
  return detail::make_result<T>(Shape{}, {total}, "sum", {ai}, [ai](const TensorImpl<T>& o) {
    auto& g = ai->grad_buffer();
    for (auto& v : g) v += o.grad[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& a, Shape shape) {
  if (numel(shape) != a.numel())
    throw Error("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
  std::vector<T> out(a.data().begin(), a.data().end());
  Impl<T> ai = a.impl();
  return detail::make_result<T>(std::move(shape), std::move(out), "reshape", {ai},
                                [ai](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                                });
}

template <typename T>
BasicTensor<T> slice(const BasicTensor<T>& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const auto s = split_axis(a.shape(), axis);
  if (begin >= end || end > s.extent)
    throw Error("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                ") invalid for extent " + std::to_string(s.extent));
  const std::size_t width = end - begin;
  Shape shape = a.shape();
  shape[axis] = width;
  std::vector<T> out(s.outer * width * s.inner);
  auto x = a.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    std::copy_n(x.begin() + (o * s.extent + begin) * s.inner, width * s.inner,
                out.begin() + o * width * s.inner);
  Impl<T> ai = a.impl();
  return detail::make_result<T>(std::move(shape), std::move(out), "slice", {ai},
                                [ai, s, begin, width](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t q = 0; q < s.outer; ++q)
                                    for (std::size_t i = 0; i < width * s.inner; ++i)
                                      g[(q * s.extent + begin) * s.inner + i] +=
                                          o.grad[q * width * s.inner + i];
                                });
}

template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw Error("concat: no inputs");
  Shape shape = parts.front().shape();
  const auto base = split_axis(shape, axis);
  std::size_t extent = 0;
  std::vector<Impl<T>> inputs;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    const auto s = split_axis(p.shape(), axis);
    if (p.rank() != shape.size() || s.outer != base.outer || s.inner != base.inner)
      throw Error("concat: incompatible shape " + to_string(p.shape()));
    extent += s.extent;
    widths.push_back(s.extent);
    inputs.push_back(p.impl());
  }
  shape[axis] = extent;
  std::vector<T> out(base.outer * extent * base.inner);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto x = parts[k].data();
    for (std::size_t o = 0; o < base.outer; ++o)
      std::copy_n(x.begin() + o * widths[k] * base.inner, widths[k] * base.inner,
                  out.begin() + (o * extent + offset) * base.inner);
    offset += widths[k];
  }
  auto captured = inputs;
  return detail::make_result<T>(
      std::move(shape), std::move(out), "concat", std::move(inputs),
      [captured, widths, base, extent](const TensorImpl<T>& o) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < captured.size(); ++k) {
          if (captured[k]->requires_grad) {
            auto& g = captured[k]->grad_buffer();
            for (std::size_t q = 0; q < base.outer; ++q)
              for (std::size_t i = 0; i < widths[k] * base.inner; ++i)
                g[q * widths[k] * base.inner + i] += o.grad[(q * extent + offset) * base.inner + i];
          }
          offset += widths[k];
        }
      });
}

template <typename T>
BasicTensor<T> mul_channels(const BasicTensor<T>& features, const BasicTensor<T>& weights) {
  if (features.rank() != 4 || weights.rank() != 4 || weights.dim(1) != 1 ||
      features.dim(0) != weights.dim(0) || features.dim(2) != weights.dim(2) ||
      features.dim(3) != weights.dim(3))
    throw Error("mul_channels: shape mismatch " + to_string(features.shape()) + " vs " +
                to_string(weights.shape()));
  const std::size_t n = features.dim(0), c = features.dim(1), hw = features.dim(2) * features.dim(3);
  std::vector<T> out(features.numel());
  auto f = features.data(), w = weights.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p)
        out[(i * c + ch) * hw + p] = f[(i * c + ch) * hw + p] * w[i * hw + p];
  Impl<T> fi = features.impl(), wi = weights.impl();
  return detail::make_result<T>(
      features.shape(), std::move(out), "mul_channels", {fi, wi},
      [fi, wi, n, c, hw](const TensorImpl<T>& o) {
        if (fi->requires_grad) {
          auto& g = fi->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t ch = 0; ch < c; ++ch)
              for (std::size_t p = 0; p < hw; ++p)
                g[(i * c + ch) * hw + p] += o.grad[(i * c + ch) * hw + p] * wi->data[i * hw + p];
        }
        if (wi->requires_grad) {
          auto& g = wi->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t ch = 0; ch < c; ++ch)
              for (std::size_t p = 0; p < hw; ++p)
                g[i * hw + p] += o.grad[(i * c + ch) * hw + p] * fi->data[(i * c + ch) * hw + p];
        }
      });
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& a) {
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v = v > T(0) ? v : T(0);
  Impl<T> ai = a.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "relu", {ai},
                                [ai](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t i = 0; i < g.size(); ++i)
                                    if (ai->data[i] > T(0)) g[i] += o.grad[i];
                                });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& a) {
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v = T(1) / (T(1) + std::exp(-v));
  Impl<T> ai = a.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "sigmoid", {ai},
                                [ai](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t i = 0; i < g.size(); ++i)
                                    g[i] += o.grad[i] * o.data[i] * (T(1) - o.data[i]);
                                });
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& a, std::size_t axis) {
  const auto s = split_axis(a.shape(), axis);
  std::vector<T> out(a.numel());
  auto x = a.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      T peak = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < s.extent; ++k) peak = std::max(peak, x[base + k * s.inner]);
      T total = 0;
      for (std::size_t k = 0; k < s.extent; ++k) {
        const T e = std::exp(x[base + k * s.inner] - peak);
        out[base + k * s.inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < s.extent; ++k) out[base + k * s.inner] /= total;
    }
  Impl<T> ai = a.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "softmax", {ai},
                                [ai, s](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t q = 0; q < s.outer; ++q)
                                    for (std::size_t in = 0; in < s.inner; ++in) {
                                      const std::size_t base = q * s.extent * s.inner + in;
                                      T dot = 0;
                                      for (std::size_t k = 0; k < s.extent; ++k) {
                                        const std::size_t i = base + k * s.inner;
                                        dot += o.grad[i] * o.data[i];
                                      }
                                      for (std::size_t k = 0; k < s.extent; ++k) {
                                        const std::size_t i = base + k * s.inner;
                                        g[i] += o.data[i] * (o.grad[i] - dot);
                                      }
                                    }
                                });
}

template <typename T>
BasicTensor<T> log_softmax(const BasicTensor<T>& a, std::size_t axis) {
  const auto s = split_axis(a.shape(), axis);
  std::vector<T> out(a.numel());
  auto x = a.data();
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      T peak = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < s.extent; ++k) peak = std::max(peak, x[base + k * s.inner]);
      T total = 0;
      for (std::size_t k = 0; k < s.extent; ++k) total += std::exp(x[base + k * s.inner] - peak);
      const T lse = peak + std::log(total);
      for (std::size_t k = 0; k < s.extent; ++k)
        out[base + k * s.inner] = x[base + k * s.inner] - lse;
    }
  Impl<T> ai = a.impl();
  return detail::make_result<T>(a.shape(), std::move(out), "log_softmax", {ai},
                                [ai, s](const TensorImpl<T>& o) {
                                  auto& g = ai->grad_buffer();
                                  for (std::size_t q = 0; q < s.outer; ++q)
                                    for (std::size_t in = 0; in < s.inner; ++in) {
                                      const std::size_t base = q * s.extent * s.inner + in;
                                      T total = 0;
                                      for (std::size_t k = 0; k < s.extent; ++k)
                                        total += o.grad[base + k * s.inner];
                                      for (std::size_t k = 0; k < s.extent; ++k) {
                                        const std::size_t i = base + k * s.inner;
                                        g[i] += o.grad[i] - std::exp(o.data[i]) * total;
                                      }
                                    }
                                });
}

template <typename T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x, std::size_t window, std::size_t stride) {
  if (x.rank() != 4) throw Error("maxpool2d: expected NCHW input, got " + to_string(x.shape()));
  if (window == 0 || stride == 0) throw Error("maxpool2d: window and stride must be positive");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (window > h || window > w) throw Error("window exceeds input");
  const std::size_t oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
  std::vector<T> out(n * c * oh * ow);
  std::vector<std::uint32_t> argmax(out.size());
  auto src = x.data();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const T* p = src.data() + plane * h * w;
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        std::size_t best = (i * stride) * w + j * stride;
        for (std::size_t di = 0; di < window; ++di)
          for (std::size_t dj = 0; dj < window; ++dj) {
            const std::size_t idx = (i * stride + di) * w + j * stride + dj;
            if (p[idx] > p[best]) best = idx;
          }
        const std::size_t o = (plane * oh + i) * ow + j;
        out[o] = p[best];
        argmax[o] = static_cast<std::uint32_t>(plane * h * w + best);
      }
  }
  Impl<T> xi = x.impl();
  const bool record = detail::any_requires_grad<T>({xi});
  return detail::make_result<T>(Shape{n, c, oh, ow}, std::move(out), "maxpool2d", {xi},
                                [xi, argmax = record ? std::move(argmax)
                                                     : std::vector<std::uint32_t>{}](
                                    const TensorImpl<T>& o) {
                                  auto& g = xi->grad_buffer();
                                  for (std::size_t i = 0; i < argmax.size(); ++i)
                                    g[argmax[i]] += o.grad[i];
                                });
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1 || weight.dim(1) != x.dim(1) ||
      bias.dim(0) != weight.dim(0))
    throw Error("linear: shape mismatch x" + to_string(x.shape()) + " w" +
                to_string(weight.shape()) + " b" + to_string(bias.shape()));
  const std::size_t n = x.dim(0), in = x.dim(1), outf = weight.dim(0);
  std::vector<T> out(n * outf);
  auto xv = x.data(), wv = weight.data(), bv = bias.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < outf; ++o) {
      T acc = bv[o];
      const T* xr = xv.data() + i * in;
      const T* wr = wv.data() + o * in;
      for (std::size_t k = 0; k < in; ++k) acc += xr[k] * wr[k];
      out[i * outf + o] = acc;
    }
  Impl<T> xi = x.impl(), wi = weight.impl(), bi = bias.impl();
  return detail::make_result<T>(
      Shape{n, outf}, std::move(out), "linear", {xi, wi, bi},
      [xi, wi, bi, n, in, outf](const TensorImpl<T>& o) {
        if (xi->requires_grad) {
          auto& g = xi->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t of = 0; of < outf; ++of) {
              const T go = o.grad[i * outf + of];
              const T* wr = wi->data.data() + of * in;
              for (std::size_t k = 0; k < in; ++k) g[i * in + k] += go * wr[k];
            }
        }
        if (wi->requires_grad) {
          auto& g = wi->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t of = 0; of < outf; ++of) {
              const T go = o.grad[i * outf + of];
              const T* xr = xi->data.data() + i * in;
              for (std::size_t k = 0; k < in; ++k) g[of * in + k] += go * xr[k];
            }
        }
        if (bi->requires_grad) {
          auto& g = bi->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t of = 0; of < outf; ++of) g[of] += o.grad[i * outf + of];
        }
      });
}

template <typename T>
BasicTensor<T> l1_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "l1_loss");
  const auto x = a.data(), y = b.data();
  T total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
  const T inv = T(1) / static_cast<T>(x.size());
  Impl<T> ai = a.impl(), bi = b.impl();
  return detail::make_result<T>(Shape{}, {total * inv}, "l1_loss", {ai, bi},
                                [ai, bi, inv](const TensorImpl<T>& o) {
                                  const T go = o.grad[0] * inv;
                                  const auto& x = ai->data;
                                  const auto& y = bi->data;
                                  if (ai->requires_grad) {
                                    auto& g = ai->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += go * sign(x[i] - y[i]);
                                  }
                                  if (bi->requires_grad) {
                                    auto& g = bi->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= go * sign(x[i] - y[i]);
                                  }
                                });
}

template <typename T>
BasicTensor<T> cosine(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.numel() != b.numel())
    throw Error("cosine: length mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const auto x = a.data(), y = b.data();
  T dot = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    aa += x[i] * x[i];
    bb += y[i] * y[i];
  }
  if (aa == T(0) || bb == T(0)) throw Error("zero-norm embedding");
  const T denom = std::sqrt(aa * bb);
  const T c = dot / denom;
  Impl<T> ai = a.impl(), bi = b.impl();
  return detail::make_result<T>(Shape{}, {c}, "cosine", {ai, bi},
                                [ai, bi, c, aa, bb, denom](const TensorImpl<T>& o) {
                                  const T go = o.grad[0];
                                  const auto& x = ai->data;
                                  const auto& y = bi->data;
                                  if (ai->requires_grad) {
                                    auto& g = ai->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i)
                                      g[i] += go * (y[i] / denom - c * x[i] / aa);
                                  }
                                  if (bi->requires_grad) {
                                    auto& g = bi->grad_buffer();
                                    for (std::size_t i = 0; i < g.size(); ++i)
                                      g[i] += go * (x[i] / denom - c * y[i] / bb);
                                  }
                                });
}

template <typename T>
BasicTensor<T> nll_loss(const BasicTensor<T>& log_probs, std::span<const std::int32_t> labels) {
  if (log_probs.rank() < 2) throw Error("nll_loss: expected N×C×... input");
  const std::size_t n = log_probs.dim(0), c = log_probs.dim(1);
  const std::size_t inner = log_probs.numel() / (n * c);
  if (labels.size() != n * inner)
    throw Error("nll_loss: expected " + std::to_string(n * inner) + " labels, got " +
                std::to_string(labels.size()));
  auto lp = log_probs.data();
  T total = 0;
  std::vector<std::int32_t> saved(labels.begin(), labels.end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < inner; ++p) {
      const auto label = saved[i * inner + p];
      if (label < 0 || static_cast<std::size_t>(label) >= c)
        throw Error("nll_loss: label " + std::to_string(label) + " out of range");
      total -= lp[(i * c + label) * inner + p];
    }
  const T inv = T(1) / static_cast<T>(n * inner);
  Impl<T> li = log_probs.impl();
  return detail::make_result<T>(Shape{}, {total * inv}, "nll_loss", {li},
                                [li, saved = std::move(saved), n, c, inner,
                                 inv](const TensorImpl<T>& o) {
                                  auto& g = li->grad_buffer();
                                  const T go = o.grad[0] * inv;
                                  for (std::size_t i = 0; i < n; ++i)
                                    for (std::size_t p = 0; p < inner; ++p)
                                      g[(i * c + saved[i * inner + p]) * inner + p] -= go;
                                });
}

#define F2P_INSTANTIATE_OPS(T)                                                                  \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                    \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                    \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                    \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                      \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                           \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                          \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                                \
  template BasicTensor<T> slice(const BasicTensor<T>&, std::size_t, std::size_t, std::size_t);  \
  template BasicTensor<T> concat(const std::vector<BasicTensor<T>>&, std::size_t);              \
  template BasicTensor<T> mul_channels(const BasicTensor<T>&, const BasicTensor<T>&);           \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                          \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                       \
  template BasicTensor<T> softmax(const BasicTensor<T>&, std::size_t);                          \
  template BasicTensor<T> log_softmax(const BasicTensor<T>&, std::size_t);                      \
  template BasicTensor<T> maxpool2d(const BasicTensor<T>&, std::size_t, std::size_t);           \
  template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                 const BasicTensor<T>&);                                        \
  template BasicTensor<T> l1_loss(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> cosine(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> nll_loss(const BasicTensor<T>&, std::span<const std::int32_t>);

F2P_INSTANTIATE_OPS(float)
F2P_INSTANTIATE_OPS(double)

}  // namespace f2p::ad
