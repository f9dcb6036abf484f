#include <doctest.h>

#include <cmath>
#include <random>

#include "f2p/autodiff/gradcheck.hpp"
#include "f2p/autodiff/nn.hpp"
#include "f2p/autodiff/ops.hpp"

using namespace f2p::ad;

namespace {

template <typename T>
BasicTensor<T> random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = false) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BasicTensor<T> t(std::move(shape), T(0), requires_grad);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
double inner(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += double(a.data()[i]) * double(b.data()[i]);
  return acc;
}

}  // namespace

TEST_SUITE("conv2d") {
  TEST_CASE("identity 1x1 kernel reproduces the input") {
    Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    auto y = conv2d(x, Tensor({1, 1, 1, 1}, 1.0f), Tensor({1}, 0.0f), 1, 0);
    CHECK(y.shape() == Shape{1, 1, 3, 3});
    for (std::size_t i = 0; i < 9; ++i) CHECK(y.data()[i] == x.data()[i]);
  }

  TEST_CASE("diagonal kernel sums the diagonal") {
    Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor w({1, 1, 2, 2}, {1, 0, 0, 1});
    auto y = conv2d(x, w, Tensor({1}, 0.0f), 1, 0);
    CHECK(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y.item() == 5.0f);
  }

  TEST_CASE("strided output shape") {
    std::mt19937_64 rng(1);
    auto y = conv2d(random_tensor<float>({1, 3, 64, 64}, rng), random_tensor<float>({32, 3, 3, 3}, rng),
                    Tensor({32}), 2, 1);
    CHECK(y.shape() == Shape{1, 32, 32, 32});
  }

  TEST_CASE("channel mismatch is rejected") {
    CHECK_THROWS_WITH(conv2d(Tensor({1, 2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1}), 1, 0),
                      "channel mismatch");
    CHECK_THROWS_WITH(conv2d_transpose(Tensor({1, 2, 4, 4}), Tensor({3, 1, 3, 3}), Tensor({1}), 1, 0),
                      "channel mismatch");
  }
}

TEST_SUITE("conv2d_transpose") {
  TEST_CASE("single pixel broadcasts through the kernel") {
    auto y = conv2d_transpose(Tensor({1, 1, 1, 1}, 2.0f), Tensor({1, 1, 4, 4}, 1.0f), Tensor({1}), 1, 0);
    CHECK(y.shape() == Shape{1, 1, 4, 4});
    for (float v : y.data()) CHECK(v == 2.0f);
  }

  TEST_CASE("kernel 4 stride 2 pad 1 doubles resolution") {
    auto y = conv2d_transpose(Tensor({1, 1, 4, 4}, 1.0f), Tensor({1, 5, 4, 4}, 1.0f), Tensor({5}), 2, 1);
    CHECK(y.shape() == Shape{1, 5, 8, 8});
  }

  TEST_CASE("adjoint identity <conv(a,w), b> == <a, convT(b,w)>") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t stride = 1 + trial % 2, pad = trial % 3 == 0 ? 0 : 1, k = 3 + trial % 2;
      auto a = random_tensor<float>({2, 3, 7, 7}, rng);
      auto w = random_tensor<float>({4, 3, k, k}, rng);
      auto ca = conv2d(a, w, Tensor({4}), stride, pad);
      auto b = random_tensor<float>(ca.shape(), rng);
      auto tb = conv2d_transpose(b, w, Tensor({3}), stride, pad);
      if (tb.shape() != a.shape()) continue;  // stride remainder: sizes do not round-trip
      const double lhs = inner(ca, b), rhs = inner(a, tb);
      CHECK(std::abs(lhs - rhs) <= 1e-4 * std::max(1.0, std::abs(lhs)));
    }
  }

  TEST_CASE("forward equals conv2d input-gradient") {
    std::mt19937_64 rng(7);
    auto a = random_tensor<double>({2, 3, 8, 8}, rng, true);
    auto w = random_tensor<double>({4, 3, 4, 4}, rng);
    auto y = conv2d(a, w, TensorD({4}), 2, 1);
    auto b = random_tensor<double>(y.shape(), rng);
    backward(sum(mul(y, b)));
    auto t = conv2d_transpose(b, w, TensorD({3}), 2, 1);
    REQUIRE(t.shape() == a.shape());
    for (std::size_t i = 0; i < t.numel(); ++i) CHECK(std::abs(t.data()[i] - a.grad()[i]) <= 1e-5);
  }
}

TEST_SUITE("batch_norm") {
  TEST_CASE("constant channel in train mode yields beta") {
    Tensor x({2, 2, 2, 2}, 3.0f);
    Tensor gamma({2}, {1.5f, -2.0f}), beta({2}, {0.25f, -0.75f});
    RunningStats<float> stats{Tensor({2}, 0.0f), Tensor({2}, 1.0f)};
    auto y = batch_norm(x, gamma, beta, stats, Mode::train);
    for (std::size_t i = 0; i < y.numel(); ++i) CHECK(y.data()[i] == (i % 8 < 4 ? 0.25f : -0.75f));
  }

  TEST_CASE("standardizes a channel with mean 2 and variance 1") {
    Tensor x({4, 1}, {1, 1, 3, 3});
    RunningStats<float> stats{Tensor({1}, 0.0f), Tensor({1}, 1.0f)};
    auto y = batch_norm(x, Tensor({1}, 1.0f), Tensor({1}, 0.0f), stats, Mode::train);
    double m = 0, v = 0;
    for (float e : y.data()) m += e / 4.0;
    for (float e : y.data()) v += (e - m) * (e - m) / 4.0;
    CHECK(m == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
    // running stats move 10% toward the batch (unbiased variance 4/3)
    CHECK(stats.mean.data()[0] == doctest::Approx(0.2));
    CHECK(stats.var.data()[0] == doctest::Approx(0.9 + 0.1 * 4.0 / 3.0));
  }

  TEST_CASE("eval mode matches the hand formula") {
    Tensor x({4, 1}, {0.5f, -1.0f, 2.0f, 3.5f});
    RunningStats<float> stats{Tensor({1}, 0.75f), Tensor({1}, 2.0f)};
    auto y = batch_norm(x, Tensor({1}, 1.2f), Tensor({1}, -0.3f), stats, Mode::eval);
    for (std::size_t i = 0; i < 4; ++i) {
      const double expect = (x.data()[i] - 0.75) / std::sqrt(2.0 + 1e-5) * 1.2 - 0.3;
      CHECK(y.data()[i] == doctest::Approx(expect).epsilon(1e-6));
    }
    CHECK(stats.mean.data()[0] == 0.75f);
  }

  TEST_CASE("single sample with zero variance does not fail") {
    Tensor x({1, 3, 1, 1}, {1.0f, 2.0f, 3.0f});
    RunningStats<float> stats{Tensor({3}, 0.0f), Tensor({3}, 1.0f)};
    auto y = batch_norm(x, Tensor({3}, 1.0f), Tensor({3}, 0.0f), stats, Mode::train);
    for (float v : y.data()) CHECK(v == 0.0f);
  }
}

TEST_SUITE("elementwise") {
  TEST_CASE("relu") {
    auto y = relu(Tensor({3}, {-1, 0, 2}));
    CHECK(y.data()[0] == 0);
    CHECK(y.data()[1] == 0);
    CHECK(y.data()[2] == 2);
  }

  TEST_CASE("softmax of equal logits is uniform and rows sum to one") {
    auto y = softmax(Tensor({1, 3}, 0.0f), 1);
    for (float v : y.data()) CHECK(v == doctest::Approx(1.0 / 3.0));
    std::mt19937_64 rng(3);
    auto z = softmax(random_tensor<float>({2, 5, 3}, rng), 1);
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t i = 0; i < 3; ++i) {
        double s = 0;
        for (std::size_t k = 0; k < 5; ++k) s += z.data()[(n * 5 + k) * 3 + i];
        CHECK(s == doctest::Approx(1.0));
      }
  }

  TEST_CASE("maxpool picks the window maximum") {
    auto y = maxpool2d(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}), 2, 2);
    CHECK(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y.item() == 4.0f);
    CHECK_THROWS_WITH(maxpool2d(Tensor({1, 1, 2, 2}), 3, 1), "window exceeds input");
  }
}

TEST_SUITE("losses") {
  TEST_CASE("l1 loss values and subgradient") {
    Tensor a({2}, {1, 2}, true);
    Tensor b({2}, {0, 4});
    CHECK(l1_loss(a, a.detach()).item() == 0.0f);
    auto loss = l1_loss(a, b);
    CHECK(loss.item() == doctest::Approx(1.5));
    backward(loss);
    CHECK(a.grad()[0] == doctest::Approx(0.5));
    CHECK(a.grad()[1] == doctest::Approx(-0.5));
    Tensor c({2}, {1, 2}, true);
    backward(l1_loss(c, Tensor({2}, {1, 2})));
    CHECK(c.grad()[0] == 0.0f);
    CHECK_THROWS(l1_loss(Tensor({2}), Tensor({3})));
  }

  TEST_CASE("cosine") {
    Tensor a({3}, {0.3f, -2.0f, 1.1f});
    CHECK(cosine(a, a).item() == doctest::Approx(1.0));
    CHECK(cosine(Tensor({2}, {1, 0}), Tensor({2}, {0, 1})).item() == 0.0f);
    CHECK(cosine(Tensor({2}, {3, 4}), Tensor({2}, {4, 3})).item() == doctest::Approx(0.96));
    CHECK_THROWS_WITH(cosine(Tensor({2}, 0.0f), Tensor({2}, 1.0f)), "zero-norm embedding");
  }
}

TEST_SUITE("backward") {
  TEST_CASE("linear and quadratic scalars") {
    auto x = Tensor::scalar(2.0f, true);
    backward(scale(x, 3.0f));
    CHECK(x.grad()[0] == 3.0f);
    auto z = Tensor::scalar(2.0f, true);
    backward(mul(z, z));
    CHECK(z.grad()[0] == 4.0f);
  }

  TEST_CASE("two uses of one tensor sum their gradients") {
    auto x = Tensor::scalar(1.0f, true);
    backward(add(x, x));
    CHECK(x.grad()[0] == 2.0f);
  }

  TEST_CASE("repeated calls accumulate into leaves; root gradient is ones") {
    auto x = Tensor::scalar(2.0f, true);
    auto y = scale(x, 3.0f);
    backward(y);
    backward(y);
    CHECK(x.grad()[0] == 6.0f);
    CHECK(y.grad()[0] == 1.0f);
  }

  TEST_CASE("every reachable tensor receives a gradient") {
    Tensor x({2, 2}, {1, -2, 3, 4}, true);
    auto h = relu(x);
    auto root = sum(h);
    backward(root);
    CHECK(h.has_grad());
    CHECK(x.has_grad());
  }

  TEST_CASE("graph visits nodes in reverse topological order") {
    auto x = Tensor::scalar(1.5f, true);
    auto a = scale(x, 2.0f);
    auto b = mul(a, x);
    auto c = add(b, a);
    auto graph = Graph<float>::trace(c);
    auto nodes = graph.nodes();
    REQUIRE(nodes.size() == 4);
    CHECK(nodes.front() == x.impl());
    CHECK(nodes.back() == c.impl());
    // every node appears after all of its inputs
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i]->grad_fn)
        for (const auto& in : nodes[i]->grad_fn->inputs)
          for (std::size_t j = i; j < nodes.size(); ++j) CHECK(nodes[j] != in);
  }

  TEST_CASE("non-scalar root is rejected") {
    Tensor x({2}, 1.0f, true);
    CHECK_THROWS(backward(relu(x)));
  }

  TEST_CASE("no-grad guard suppresses recording") {
    Tensor x({2}, 1.0f, true);
    NoGradGuard guard;
    CHECK_FALSE(relu(x).requires_grad());
  }
}

TEST_SUITE("gradcheck") {
  TEST_CASE("every op passes the finite-difference suite") {
    auto results = run_gradcheck_suite(2024);
    CHECK(results.size() >= 20);
    for (const auto& r : results) {
      INFO(r.name << " rel error " << r.max_rel_error);
      CHECK(r.passed);
    }
  }

  TEST_CASE("a corrupted backward pass is named as failing") {
    auto results = run_gradcheck_suite(2024, "conv2d");
    for (const auto& r : results) CHECK(r.passed == (r.name != "conv2d"));
  }

  TEST_CASE("verdicts are reproducible for a fixed seed") {
    auto a = run_gradcheck_suite(99), b = run_gradcheck_suite(99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].max_rel_error == b[i].max_rel_error);
  }

  TEST_CASE("float composite through BN-conv stack stays within 1e-3 under randomized shapes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
      const std::size_t c = 2 + trial, hw = 3 + trial;
      std::vector<TensorD> in{random_tensor<double>({2, c, hw, hw}, rng, true),
                              random_tensor<double>({c + 1, c, 3, 3}, rng, true),
                              random_tensor<double>({c + 1}, rng, true)};
      auto stats = std::make_shared<RunningStats<double>>(
          RunningStats<double>{TensorD({c + 1}, 0.0), TensorD({c + 1}, 1.0)});
      auto weights = random_tensor<double>({2, c + 1, hw, hw}, rng);
      ScalarFn<double> fn = [stats, weights, c](const std::vector<TensorD>& v) {
        auto h = conv2d(v[0], v[1], v[2], 1, 1);
        h = batch_norm(h, TensorD({c + 1}, 1.0), TensorD({c + 1}, 0.0), *stats, Mode::train);
        return sum(mul(sigmoid(h), weights));
      };
      CHECK(max_relative_error(fn, in) <= 1e-3);
    }
  }
}

TEST_CASE("forward passes are bit-reproducible") {
  std::mt19937_64 r1(5), r2(5);
  auto x1 = random_tensor<float>({2, 3, 8, 8}, r1), x2 = random_tensor<float>({2, 3, 8, 8}, r2);
  Rng i1(9), i2(9);
  Conv2d<float> c1(3, 4, 3, 1, 1, i1), c2(3, 4, 3, 1, 1, i2);
  auto y1 = c1(x1), y2 = c2(x2);
  for (std::size_t i = 0; i < y1.numel(); ++i) CHECK(y1.data()[i] == y2.data()[i]);
}
