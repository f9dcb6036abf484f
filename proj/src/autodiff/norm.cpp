#include <Eigen/Core>
#include <cmath>

#include "f2p/autodiff/ops.hpp"

namespace f2p::ad {

namespace {

template <typename T>
using Plane = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstPlane = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;

constexpr std::size_t kLanes = 8;

/// Sum of f(k) over [0, p) in a fixed order independent of buffer alignment.
template <typename T, typename F>
T lane_sum(std::size_t p, F f) {
  T lanes[kLanes] = {};
  std::size_t k = 0;
  for (; k + kLanes <= p; k += kLanes)
    for (std::size_t l = 0; l < kLanes; ++l) lanes[l] += f(k + l);
  for (std::size_t l = 0; k < p; ++k, ++l) lanes[l] += f(k);
  T total = 0;
  for (T v : lanes) total += v;
  return total;
}

}  // namespace

template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                          const BasicTensor<T>& beta, RunningStats<T>& stats, Mode mode) {
  if (x.rank() < 2) throw Error("batch_norm: expected at least N×C input");
  const std::size_t n = x.dim(0), c = x.dim(1), p = x.numel() / (n * c);
  if (gamma.numel() != c || beta.numel() != c || stats.mean.numel() != c || stats.var.numel() != c)
    throw Error("batch_norm: channel count " + std::to_string(c) +
                " does not match parameters of length " + std::to_string(gamma.numel()));
  const T eps = static_cast<T>(kBatchNormEpsilon);
  const T momentum = static_cast<T>(kBatchNormMomentum);
  const std::size_t count = n * p;
  auto xv = x.data(), gv = gamma.data(), bv = beta.data();

  std::vector<T> mu(c), inv_std(c);
  if (mode == Mode::train) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      T acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* src = &xv[(i * c + ch) * p];
        acc += lane_sum<T>(p, [src](std::size_t k) { return src[k]; });
      }
      const T m = acc / static_cast<T>(count);
      T sq = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* src = &xv[(i * c + ch) * p];
        sq += lane_sum<T>(p, [src, m](std::size_t k) { return (src[k] - m) * (src[k] - m); });
      }
      const T var = sq / static_cast<T>(count);
      mu[ch] = m;
      inv_std[ch] = T(1) / std::sqrt(var + eps);
      const T unbiased = count > 1 ? sq / static_cast<T>(count - 1) : var;
      auto rm = stats.mean.data();
      auto rv = stats.var.data();
      rm[ch] = momentum * rm[ch] + (T(1) - momentum) * m;
      rv[ch] = momentum * rv[ch] + (T(1) - momentum) * unbiased;
    }
  } else {
    auto rm = stats.mean.data();
    auto rv = stats.var.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      mu[ch] = rm[ch];
      inv_std[ch] = T(1) / std::sqrt(rv[ch] + eps);
    }
  }

  std::vector<T> xhat(x.numel()), out(x.numel());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t at = (i * c + ch) * p;
      Plane<T> h(&xhat[at], p);
      h = (ConstPlane<T>(&xv[at], p) - mu[ch]) * inv_std[ch];
      Plane<T>(&out[at], p) = gv[ch] * h + bv[ch];
    }

  auto xi = x.impl(), gi = gamma.impl(), bi = beta.impl();
  const bool record = detail::any_requires_grad<T>({xi, gi, bi});
  if (!record) xhat.clear();
  return detail::make_result<T>(
      x.shape(), std::move(out), "batch_norm", {xi, gi, bi},
      [xi, gi, bi, xhat = std::move(xhat), inv_std = std::move(inv_std), n, c, p, count,
       mode](const TensorImpl<T>& o) {
        const auto& dy = o.grad;
        std::vector<T> sum_dy(c, T(0)), sum_dy_xhat(c, T(0));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t at = (i * c + ch) * p;
            const T* d = &dy[at];
            const T* h = &xhat[at];
            sum_dy[ch] += lane_sum<T>(p, [d](std::size_t k) { return d[k]; });
            sum_dy_xhat[ch] += lane_sum<T>(p, [d, h](std::size_t k) { return d[k] * h[k]; });
          }
        if (gi->requires_grad) {
          auto& g = gi->grad_buffer();
          for (std::size_t ch = 0; ch < c; ++ch) g[ch] += sum_dy_xhat[ch];
        }
        if (bi->requires_grad) {
          auto& g = bi->grad_buffer();
          for (std::size_t ch = 0; ch < c; ++ch) g[ch] += sum_dy[ch];
        }
        if (!xi->requires_grad) return;
        auto& g = xi->grad_buffer();
        const auto& gam = gi->data;
        const T inv_count = T(1) / static_cast<T>(count);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t at = (i * c + ch) * p;
            const T scale = gam[ch] * inv_std[ch];
            Plane<T> gx(&g[at], p);
            const ConstPlane<T> d(&dy[at], p);
            if (mode == Mode::train)
              gx += scale * (d - inv_count * sum_dy[ch] - ConstPlane<T>(&xhat[at], p) * (inv_count * sum_dy_xhat[ch]));
            else
              gx += scale * d;
          }
      });
}

template BasicTensor<float> batch_norm(const BasicTensor<float>&, const BasicTensor<float>&,
                                       const BasicTensor<float>&, RunningStats<float>&, Mode);
template BasicTensor<double> batch_norm(const BasicTensor<double>&, const BasicTensor<double>&,
                                        const BasicTensor<double>&, RunningStats<double>&, Mode);

}  // namespace f2p::ad
