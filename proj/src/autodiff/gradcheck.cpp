#include "f2p/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "f2p/autodiff/ops.hpp"

namespace f2p::ad {

template <typename T>
double max_relative_error(const ScalarFn<T>& fn, const std::vector<BasicTensor<T>>& inputs,
                          double h, double floor) {
  for (const auto& in : inputs) {
    auto t = in;
    t.zero_grad();
  }
  auto root = fn(inputs);
  backward(root);
  double worst = 0;
  for (const auto& in : inputs) {
    if (!in.requires_grad()) continue;
    std::vector<T> analytic(in.grad().begin(), in.grad().end());
    auto values = const_cast<BasicTensor<T>&>(in).data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T saved = values[i];
      double plus, minus;
      {
        NoGradGuard guard;
        values[i] = saved + static_cast<T>(h);
        plus = static_cast<double>(fn(inputs).item());
        values[i] = saved - static_cast<T>(h);
        minus = static_cast<double>(fn(inputs).item());
      }
      values[i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double a = static_cast<double>(analytic[i]);
      worst = std::max(worst, std::abs(a - numeric) / std::max(std::abs(a), floor));
    }
  }
  return worst;
}

template double max_relative_error<float>(const ScalarFn<float>&,
                                          const std::vector<BasicTensor<float>>&, double, double);
template double max_relative_error<double>(const ScalarFn<double>&,
                                           const std::vector<BasicTensor<double>>&, double, double);

namespace {

using D = TensorD;

/// Identity forward; backward scales the incoming gradient by 1.5.
D corrupt_grad(const D& x) {
  auto xi = x.impl();
  return detail::make_result<double>(x.shape(), std::vector<double>(x.data().begin(), x.data().end()),
                                     "corrupt", {xi}, [xi](const TensorImpl<double>& o) {
                                       auto& g = xi->grad_buffer();
                                       for (std::size_t i = 0; i < g.size(); ++i)
                                         g[i] += 1.5 * o.grad[i];
                                     });
}

class SuiteBuilder {
 public:
  SuiteBuilder(std::uint64_t seed, std::string fault, double tolerance)
      : rng_(seed), fault_(std::move(fault)), tolerance_(tolerance) {}

  /// Uniform in ±[margin, 1], keeping values away from kinks at zero.
  D random(Shape shape, double margin = 0.05, bool requires_grad = true) {
    std::uniform_real_distribution<double> mag(margin, 1.0);
    std::bernoulli_distribution neg(0.5);
    D t(std::move(shape), 0.0, requires_grad);
    for (auto& v : t.data()) v = neg(rng_) ? -mag(rng_) : mag(rng_);
    return t;
  }

  /// Distinct values with gaps well above the difference step.
  D distinct(Shape shape) {
    D t(std::move(shape), 0.0, true);
    std::vector<double> values(t.numel());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = 0.05 * static_cast<double>(i) - 1.0;
    std::shuffle(values.begin(), values.end(), rng_);
    std::copy(values.begin(), values.end(), t.data().begin());
    return t;
  }

  /// Reduces any op output to a scalar through fixed random weights.
  ScalarFn<double> weighted(const std::string& name, std::function<D(const std::vector<D>&)> op) {
    const bool corrupt = name == fault_;
    auto weights = std::make_shared<std::vector<double>>();
    auto* rng = &rng_;
    return [op, corrupt, weights, rng](const std::vector<D>& in) {
      D y = op(in);
      if (corrupt) y = corrupt_grad(y);
      if (weights->size() != y.numel()) {
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        weights->resize(y.numel());
        for (auto& w : *weights) w = dist(*rng);
      }
      return sum(mul(y, D(y.shape(), *weights)));
    };
  }

  void check(const std::string& name, std::function<D(const std::vector<D>&)> op,
             std::vector<D> inputs) {
    const double err = max_relative_error<double>(weighted(name, std::move(op)), inputs);
    results_.push_back({name, err, tolerance_, std::isfinite(err) && err <= tolerance_});
  }

  std::vector<GradCheckResult> take() { return std::move(results_); }

 private:
  std::mt19937_64 rng_;
  std::string fault_;
  double tolerance_;
  std::vector<GradCheckResult> results_;
};

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed, const std::string& fault,
                                                 double tolerance) {
  SuiteBuilder s(seed, fault, tolerance);
  s.check("add", [](const auto& v) { return add(v[0], v[1]); }, {s.random({2, 3}), s.random({2, 3})});
  s.check("sub", [](const auto& v) { return sub(v[0], v[1]); }, {s.random({2, 3}), s.random({2, 3})});
  s.check("mul", [](const auto& v) { return mul(v[0], v[1]); }, {s.random({2, 3}), s.random({2, 3})});
  s.check("scale", [](const auto& v) { return scale(v[0], 2.5); }, {s.random({4})});
  s.check("mean", [](const auto& v) { return mean(v[0]); }, {s.random({3, 2})});
  s.check("reshape", [](const auto& v) { return reshape(v[0], {3, 2}); }, {s.random({2, 3})});
  s.check("slice", [](const auto& v) { return slice(v[0], 1, 1, 3); }, {s.random({2, 4})});
  s.check("concat", [](const auto& v) { return concat<double>({v[0], v[1]}, 1); },
          {s.random({2, 2}), s.random({2, 3})});
  s.check("mul_channels", [](const auto& v) { return mul_channels(v[0], v[1]); },
          {s.random({2, 3, 2, 2}), s.random({2, 1, 2, 2})});
  s.check("relu", [](const auto& v) { return relu(v[0]); }, {s.random({3, 4})});
  s.check("sigmoid", [](const auto& v) { return sigmoid(v[0]); }, {s.random({3, 4})});
  s.check("softmax", [](const auto& v) { return softmax(v[0], 1); }, {s.random({2, 4, 3})});
  s.check("log_softmax", [](const auto& v) { return log_softmax(v[0], 1); }, {s.random({2, 4, 3})});
  s.check("maxpool2d", [](const auto& v) { return maxpool2d(v[0], 2, 2); }, {s.distinct({1, 2, 4, 4})});
  s.check("linear", [](const auto& v) { return linear(v[0], v[1], v[2]); },
          {s.random({3, 4}), s.random({2, 4}), s.random({2})});
  s.check("conv2d", [](const auto& v) { return conv2d(v[0], v[1], v[2], 1, 1); },
          {s.random({2, 2, 4, 4}), s.random({3, 2, 3, 3}), s.random({3})});
  s.check("conv2d_strided", [](const auto& v) { return conv2d(v[0], v[1], v[2], 2, 1); },
          {s.random({1, 2, 5, 5}), s.random({2, 2, 3, 3}), s.random({2})});
  s.check("conv2d_transpose", [](const auto& v) { return conv2d_transpose(v[0], v[1], v[2], 2, 1); },
          {s.random({2, 3, 3, 3}), s.random({3, 2, 4, 4}), s.random({2})});
  {
    auto stats = std::make_shared<RunningStats<double>>(
        RunningStats<double>{D({3}, 0.0), D({3}, 1.0)});
    s.check("batch_norm_train",
            [stats](const auto& v) { return batch_norm(v[0], v[1], v[2], *stats, Mode::train); },
            {s.random({4, 3, 2, 2}), s.random({3}), s.random({3})});
    auto frozen = std::make_shared<RunningStats<double>>(
        RunningStats<double>{D({3}, 0.2), D({3}, 1.5)});
    s.check("batch_norm_eval",
            [frozen](const auto& v) { return batch_norm(v[0], v[1], v[2], *frozen, Mode::eval); },
            {s.random({2, 3, 2, 2}), s.random({3}), s.random({3})});
  }
  {
    auto a = s.random({6});
    auto b = s.random({6});
    // Keep |a − b| well clear of the non-differentiable tie.
    for (std::size_t i = 0; i < 6; ++i)
      if (std::abs(a.data()[i] - b.data()[i]) < 0.05) b.data()[i] += 0.2;
    s.check("l1_loss", [](const auto& v) { return l1_loss(v[0], v[1]); }, {a, b});
  }
  s.check("cosine", [](const auto& v) { return cosine(v[0], v[1]); }, {s.random({8}), s.random({8})});
  {
    static const std::int32_t labels[] = {0, 2, 1, 3, 1, 0, 2, 2};
    s.check("cross_entropy",
            [](const auto& v) { return cross_entropy(v[0], std::span<const std::int32_t>(labels)); },
            {s.random({2, 4, 2, 2})});
  }
  // A composite chain mirroring how the networks stack layers.
  s.check("composite",
          [](const auto& v) {
            auto h = conv2d_transpose(v[0], v[1], v[2], 2, 1);
            h = relu(h);
            h = conv2d(h, v[3], v[4], 1, 1);
            h = maxpool2d(h, 2, 2);
            auto flat = reshape(h, {h.dim(0), h.numel() / h.dim(0)});
            return softmax(flat, 1);
          },
          {s.random({1, 2, 2, 2}), s.random({2, 3, 4, 4}), s.random({3}), s.random({2, 3, 3, 3}),
           s.random({2})});
  return s.take();
}

}  // namespace f2p::ad
