#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "f2p/autodiff/gradcheck.hpp"
#include "f2p/cli/checkpoint.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/extractors/networks.hpp"
#include "f2p/imitator/train.hpp"
#include "f2p/renderer/image_io.hpp"

using namespace f2p;
namespace fs = std::filesystem;

namespace {

ad::Tensor params_batch(std::size_t n, std::uint64_t seed) {
  std::vector<render::ParamVector> params;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) params.push_back(render::sample_params(rng));
  std::vector<const render::ParamVector*> ptrs;
  for (const auto& p : params) ptrs.push_back(&p);
  return params_to_tensor<float>(ptrs);
}

bool same_state(const ad::StateList<float>& a, const ad::StateList<float>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a[i].tensor.data(), y = b[i].tensor.data();
    if (a[i].name != b[i].name || !std::equal(x.begin(), x.end(), y.begin(), y.end())) return false;
  }
  return true;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("f2p_test_" + name); }

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("imitator output is 3x64x64 for flat and 1x1 inputs") {
  imitator::Imitator net(1);
  const auto x = params_batch(4, 2);
  CHECK(net.forward(x, ad::Mode::train).shape() == ad::Shape{4, 3, 64, 64});
  CHECK(net.forward(ad::reshape(x, ad::Shape{4, 34, 1, 1}), ad::Mode::eval).shape() == ad::Shape{4, 3, 64, 64});
  CHECK_THROWS_AS(net.forward(ad::Tensor(ad::Shape{2, 33}), ad::Mode::eval), Error);
}

TEST_CASE("imitator eval mode maps identical inputs to identical outputs") {
  imitator::Imitator net(3);
  const auto single = params_batch(1, 9);
  const auto one = single.data();
  std::vector<float> values;
  for (int i = 0; i < 16; ++i) values.insert(values.end(), one.begin(), one.end());
  const auto out = net.forward(ad::Tensor(ad::Shape{16, 34}, values), ad::Mode::eval);
  const auto d = out.data();
  const std::size_t per = 3 * 64 * 64;
  for (std::size_t n = 1; n < 16; ++n) CHECK(std::equal(d.begin(), d.begin() + per, d.begin() + n * per));
}

TEST_CASE("gradient of mean imitator output wrt x matches finite differences") {
  imitator::ImitatorNet<double> net(4);
  ad::freeze(net);
  std::mt19937_64 rng(12);
  const auto p = render::sample_params(rng);
  ad::TensorD x(ad::Shape{1, 34}, std::vector<double>(p.values.begin(), p.values.end()), true);
  const ad::ScalarFn<double> fn = [&](const std::vector<ad::TensorD>& in) {
    return ad::mean(net.forward(in[0], ad::Mode::eval));
  };
  CHECK(ad::max_relative_error<double>(fn, {x}, 1e-5, 1e-6) <= 1e-3);
}

TEST_CASE("mean-image baseline matches a direct computation") {
  const auto data = render::sample_dataset(20, 4);
  std::vector<double> mean(64 * 64 * 3, 0.0);
  for (auto i : data.train)
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += data.samples[i].image.pixels[k] / 16.0;
  double total = 0;
  for (auto i : data.validation)
    for (std::size_t k = 0; k < mean.size(); ++k) total += std::abs(data.samples[i].image.pixels[k] - mean[k]);
  CHECK(imitator::mean_image_baseline(data) == doctest::Approx(total / (4.0 * mean.size())).epsilon(1e-9));
}

TEST_CASE("imitator training lowers the loss and is deterministic") {
  const auto data = render::sample_dataset(40, 3);
  imitator::Imitator a(7), b(7);
  const auto ra = imitator::train_imitator(a, data, tiny_config());
  const auto rb = imitator::train_imitator(b, data, tiny_config());
  REQUIRE(ra.history.size() == 3);
  CHECK(ra.history.back().train_l1 < ra.history.front().train_l1);
  CHECK(same_state(a.state(), b.state()));
  CHECK(ra.best_val_l1 == rb.best_val_l1);
  CHECK(imitator::evaluate_l1(a, data, data.validation) == doctest::Approx(ra.best_val_l1).epsilon(1e-6));
}

TEST_CASE("imitator training rejects empty data and reports divergence") {
  render::Dataset empty;
  imitator::Imitator net(1);
  CHECK_THROWS_WITH_AS(imitator::train_imitator(net, empty, tiny_config()), doctest::Contains("empty dataset"),
                       Error);
  auto data = render::sample_dataset(40, 3);
  data.samples[data.train.front()].image.pixels[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_WITH_AS(imitator::train_imitator(net, data, tiny_config()), doctest::Contains("divergence at epoch"),
                       Divergence);
}

TEST_CASE("imitator checkpoint round trip is bitwise exact") {
  const auto data = render::sample_dataset(40, 3);
  imitator::Imitator net(2);
  imitator::train_imitator(net, data, tiny_config());
  const auto path = temp_file("imitator.f2pc");
  save_checkpoint(path, net.state());
  const auto loaded = imitator::load_imitator(path);
  CHECK(same_state(net.state(), loaded.state()));
  fs::remove(path);
}

TEST_CASE("truncated or foreign checkpoints fail without a partial load") {
  imitator::Imitator source(2), target(9);
  const auto bytes = encode_checkpoint(source.state());
  const auto before = imitator::Imitator(9);
  CHECK_THROWS_WITH_AS(assign_checkpoint(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), target.state()),
                       doctest::Contains("corrupt checkpoint"), Error);
  CHECK(same_state(target.state(), before.state()));

  extractors::SegmenterNet<float> other(1);
  CHECK_THROWS_WITH_AS(assign_checkpoint(decode_checkpoint(encode_checkpoint(other.state())), target.state()),
                       doctest::Contains("checkpoint mismatch at tensor 'up0.weight'"), Error);
  CHECK(same_state(target.state(), before.state()));
}
