#include <Eigen/Core>

#include <algorithm>
#include <memory>
#include <new>

#include "f2p/autodiff/ops.hpp"

namespace f2p::ad {

namespace {

template <typename T>
using Impl = std::shared_ptr<TensorImpl<T>>;

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Geometry of a sliding window pass: an "image" side of size h×w with c
/// channels, and a "patch" side of size oh×ow, related by kernel/stride/pad.
struct Window {
  std::size_t n, c, h, w, k, stride, pad, oh, ow;
  std::size_t rows() const { return c * k * k; }
  std::size_t cols() const { return n * oh * ow; }
};

/// Output indices [lo, hi) whose input coordinate i·stride + tap − pad lies in [0, size).
struct Span {
  std::size_t lo, hi;
};

inline Span valid_span(std::size_t out, std::size_t size, std::size_t tap, std::size_t stride, std::size_t pad) {
  const long offset = static_cast<long>(tap) - static_cast<long>(pad);
  const long s = static_cast<long>(stride);
  long lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
  long hi = (static_cast<long>(size) - offset + s - 1) / s;
  hi = std::clamp(hi, 0L, static_cast<long>(out));
  lo = std::min(lo, hi);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

/// Image (N×C×H×W) -> columns ((C·k·k) × (N·oh·ow)).
template <typename T>
void im2col(const T* image, const Window& g, T* cols) {
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.c; ++c)
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      const Span rows = valid_span(g.oh, g.h, ki, g.stride, g.pad);
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const Span span = valid_span(g.ow, g.w, kj, g.stride, g.pad);
        T* row = cols + ((c * g.k + ki) * g.k + kj) * ncols;
        for (std::size_t n = 0; n < g.n; ++n) {
          const T* plane = image + (n * g.c + c) * g.h * g.w;
          T* dst = row + n * g.oh * g.ow;
          for (std::size_t i = 0; i < g.oh; ++i) {
            T* line = dst + i * g.ow;
            if (i < rows.lo || i >= rows.hi) {
              std::fill_n(line, g.ow, T(0));
              continue;
            }
            const T* src = plane + (i * g.stride + ki - g.pad) * g.w + kj - g.pad;
            std::fill(line, line + span.lo, T(0));
            for (std::size_t j = span.lo; j < span.hi; ++j) line[j] = src[j * g.stride];
            std::fill(line + span.hi, line + g.ow, T(0));
          }
        }
      }
    }
}

/// Adjoint of im2col: accumulates columns back into the image.
template <typename T>
void col2im(const T* cols, const Window& g, T* image) {
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.c; ++c)
    for (std::size_t ki = 0; ki < g.k; ++ki) {
      const Span rows = valid_span(g.oh, g.h, ki, g.stride, g.pad);
      for (std::size_t kj = 0; kj < g.k; ++kj) {
        const Span span = valid_span(g.ow, g.w, kj, g.stride, g.pad);
        const T* row = cols + ((c * g.k + ki) * g.k + kj) * ncols;
        for (std::size_t n = 0; n < g.n; ++n) {
          T* plane = image + (n * g.c + c) * g.h * g.w;
          const T* src = row + n * g.oh * g.ow;
          for (std::size_t i = rows.lo; i < rows.hi; ++i) {
            T* dst = plane + (i * g.stride + ki - g.pad) * g.w + kj - g.pad;
            const T* line = src + i * g.ow;
            for (std::size_t j = span.lo; j < span.hi; ++j) dst[j * g.stride] += line[j];
          }
        }
      }
    }
}

constexpr std::align_val_t kScratchAlign{64};

struct AlignedDelete {
  template <typename T>
  void operator()(T* p) const {
    ::operator delete[](p, kScratchAlign);
  }
};

/// Uninitialized buffer with a fixed alignment so vectorized kernels take the same path per sample.
template <typename T>
std::unique_ptr<T[], AlignedDelete> scratch(std::size_t size) {
  return std::unique_ptr<T[], AlignedDelete>(
      static_cast<T*>(::operator new[](std::max<std::size_t>(size, 1) * sizeof(T), kScratchAlign)));
}

void check_conv_args(const Shape& x, const Shape& w, const Shape& b, std::size_t in_axis,
                     std::size_t out_axis, const char* op) {
  if (x.size() != 4 || w.size() != 4 || b.size() != 1)
    throw Error(std::string(op) + ": expected NCHW input, 4-D weight and 1-D bias");
  if (w[2] != w[3]) throw Error(std::string(op) + ": kernel must be square");
  if (w[in_axis] != x[1]) throw Error("channel mismatch");
  if (b[0] != w[out_axis]) throw Error(std::string(op) + ": bias length mismatch");
}

template <typename T>
void add_bias(T* out, const T* bias, std::size_t n, std::size_t channels, std::size_t plane) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < channels; ++ch) {
      T* dst = out + (i * channels + ch) * plane;
      for (std::size_t q = 0; q < plane; ++q) dst[q] += bias[ch];
    }
}

template <typename T>
void accumulate_bias_grad(const T* grad, std::vector<T>& gb, std::size_t n, std::size_t channels,
                          std::size_t plane) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const T* src = grad + (i * channels + ch) * plane;
      T acc = 0;
      for (std::size_t q = 0; q < plane; ++q) acc += src[q];
      gb[ch] += acc;
    }
}

}  // namespace

// Every product below runs one sample at a time so that a sample's result
// does not depend on its position in the batch.

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, std::size_t stride, std::size_t padding) {
  check_conv_args(x.shape(), weight.shape(), bias.shape(), 1, 0, "conv2d");
  if (stride == 0) throw Error("conv2d: stride must be positive");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = weight.dim(0), k = weight.dim(2);
  if (h + 2 * padding < k || w + 2 * padding < k)
    throw Error("conv2d: kernel larger than padded input");
  const Window g{1, c, h, w, k, stride, padding, (h + 2 * padding - k) / stride + 1,
                 (w + 2 * padding - k) / stride + 1};
  const std::size_t p = g.oh * g.ow, in_size = c * h * w;

  auto cols = scratch<T>(g.rows() * p), ys = scratch<T>(o * p);
  std::vector<T> out(n * o * p);
  const ConstMatMap<T> wmat(weight.data().data(), o, g.rows());
  for (std::size_t i = 0; i < n; ++i) {
    im2col(x.data().data() + i * in_size, g, cols.get());
    MatMap<T>(ys.get(), o, p).noalias() = wmat * ConstMatMap<T>(cols.get(), g.rows(), p);
    std::copy_n(ys.get(), o * p, out.data() + i * o * p);
  }
  add_bias(out.data(), bias.data().data(), n, o, p);

  Impl<T> xi = x.impl(), wi = weight.impl(), bi = bias.impl();
  return detail::make_result<T>(
      Shape{n, o, g.oh, g.ow}, std::move(out), "conv2d", {xi, wi, bi},
      [xi, wi, bi, g, n, o, p, in_size](const TensorImpl<T>& out) {
        auto cols = scratch<T>(g.rows() * p), dys = scratch<T>(o * p);
        const ConstMatMap<T> wmat(wi->data.data(), o, g.rows());
        for (std::size_t i = 0; i < n; ++i) {
          std::copy_n(out.grad.data() + i * o * p, o * p, dys.get());
          const ConstMatMap<T> dy(dys.get(), o, p);
          if (wi->requires_grad) {
            im2col(xi->data.data() + i * in_size, g, cols.get());
            MatMap<T>(wi->grad_buffer().data(), o, g.rows()).noalias() +=
                dy * ConstMatMap<T>(cols.get(), g.rows(), p).transpose();
          }
          if (xi->requires_grad) {
            MatMap<T>(cols.get(), g.rows(), p).noalias() = wmat.transpose() * dy;
            col2im(cols.get(), g, xi->grad_buffer().data() + i * in_size);
          }
        }
        if (bi->requires_grad) accumulate_bias_grad(out.grad.data(), bi->grad_buffer(), n, o, p);
      });
}

template <typename T>
BasicTensor<T> conv2d_transpose(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                const BasicTensor<T>& bias, std::size_t stride,
                                std::size_t padding) {
  check_conv_args(x.shape(), weight.shape(), bias.shape(), 0, 1, "conv2d_transpose");
  if (stride == 0) throw Error("conv2d_transpose: stride must be positive");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = weight.dim(1), k = weight.dim(2);
  const long oh = static_cast<long>((h - 1) * stride + k) - 2 * static_cast<long>(padding);
  const long ow = static_cast<long>((w - 1) * stride + k) - 2 * static_cast<long>(padding);
  if (oh <= 0 || ow <= 0) throw Error("conv2d_transpose: padding too large for input");
  // The output plays the image role of the adjoint convolution; x is its patch grid.
  const Window g{1, o, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow), k, stride,
                 padding, h, w};
  const std::size_t p = h * w, op = g.h * g.w;

  auto cols = scratch<T>(g.rows() * p), xs = scratch<T>(c * p);
  std::vector<T> out(n * o * op, T(0));
  const ConstMatMap<T> wmat(weight.data().data(), c, g.rows());
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(x.data().data() + i * c * p, c * p, xs.get());
    MatMap<T>(cols.get(), g.rows(), p).noalias() = wmat.transpose() * ConstMatMap<T>(xs.get(), c, p);
    col2im(cols.get(), g, out.data() + i * o * op);
  }
  add_bias(out.data(), bias.data().data(), n, o, op);

  Impl<T> xi = x.impl(), wi = weight.impl(), bi = bias.impl();
  return detail::make_result<T>(
      Shape{n, o, g.h, g.w}, std::move(out), "conv2d_transpose", {xi, wi, bi},
      [xi, wi, bi, g, n, c, o, p, op](const TensorImpl<T>& out) {
        auto dcols = scratch<T>(g.rows() * p), xs = scratch<T>(c * p);
        const ConstMatMap<T> wmat(wi->data.data(), c, g.rows());
        for (std::size_t i = 0; i < n; ++i) {
          im2col(out.grad.data() + i * o * op, g, dcols.get());
          const ConstMatMap<T> dcolmat(dcols.get(), g.rows(), p);
          if (xi->requires_grad) {
            MatMap<T>(xs.get(), c, p).noalias() = wmat * dcolmat;
            T* dx = xi->grad_buffer().data() + i * c * p;
            for (std::size_t q = 0; q < c * p; ++q) dx[q] += xs[q];
          }
          if (wi->requires_grad) {
            std::copy_n(xi->data.data() + i * c * p, c * p, xs.get());
            MatMap<T>(wi->grad_buffer().data(), c, g.rows()).noalias() +=
                ConstMatMap<T>(xs.get(), c, p) * dcolmat.transpose();
          }
        }
        if (bi->requires_grad) accumulate_bias_grad(out.grad.data(), bi->grad_buffer(), n, o, op);
      });
}

template BasicTensor<float> conv2d(const BasicTensor<float>&, const BasicTensor<float>&,
                                   const BasicTensor<float>&, std::size_t, std::size_t);
template BasicTensor<double> conv2d(const BasicTensor<double>&, const BasicTensor<double>&,
                                    const BasicTensor<double>&, std::size_t, std::size_t);
template BasicTensor<float> conv2d_transpose(const BasicTensor<float>&, const BasicTensor<float>&,
                                             const BasicTensor<float>&, std::size_t, std::size_t);
template BasicTensor<double> conv2d_transpose(const BasicTensor<double>&,
                                              const BasicTensor<double>&,
                                              const BasicTensor<double>&, std::size_t,
                                              std::size_t);

}  // namespace f2p::ad
