#include <doctest.h>

#include <cmath>

#include "f2p/cli/checkpoint.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/renderer/dataset.hpp"
#include "f2p/renderer/render.hpp"
#include "f2p/search/params_file.hpp"
#include "f2p/search/search.hpp"

using namespace f2p;
using search::SearchConfig;

namespace {

template <typename T>
struct Nets {
  imitator::ImitatorNet<T> g{1};
  extractors::RecognizerNet<T> f1{8, 2};
  extractors::SegmenterNet<T> f2{3};

  search::Models<T> models() const { return {g, f1, f2}; }
};

std::string encode_checkpoint_like(const Nets<float>& nets) {
  return encode_checkpoint(nets.g.state()) + encode_checkpoint(nets.f1.state()) + encode_checkpoint(nets.f2.state());
}

render::Image sample_face(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return render::render(render::sample_params(rng)).image;
}

}  // namespace

TEST_CASE("softmax smoothing is uniform at equal logits") {
  const auto s = search::smooth_discrete(ad::Tensor(ad::Shape{4}, 0.3f), 100.0f);
  for (float v : s.data()) CHECK(v == 0.25f);
  const auto d = search::smooth_discrete(ad::TensorD(ad::Shape{3}, 0.0), 100.0);
  for (double v : d.data()) CHECK(v == 1.0 / 3.0);
}

TEST_CASE("softmax smoothing sharpens with beta") {
  const ad::TensorD logits(ad::Shape{4}, std::vector<double>{0.2, 0.9, 0.5, 0.85});
  double previous = 0;
  for (double beta : {1.0, 10.0, 100.0, 1000.0}) {
    const auto s = search::smooth_discrete(logits, beta);
    const double top = *std::max_element(s.data().begin(), s.data().end());
    CHECK(top >= previous);
    CHECK(s.data()[1] == top);
    previous = top;
  }
  const auto gap = search::smooth_discrete(ad::TensorD(ad::Shape{3}, std::vector<double>{1, 0, 0}), 100.0);
  CHECK(gap.data()[0] >= 1.0 - 1e-6);
}

TEST_CASE("smoothed input keeps the continuous block and smooths each group") {
  std::mt19937_64 rng(3);
  auto p = render::sample_params(rng);
  const ad::Tensor x(ad::Shape{1, 34}, std::vector<float>(p.values.begin(), p.values.end()));
  const auto s = search::smoothed_input(x, 100.0f);
  for (std::size_t i = 0; i < render::kContinuous; ++i) CHECK(s.data()[i] == p[i]);
  for (const auto& g : render::ParamSchema::groups()) {
    float total = 0;
    for (std::size_t k = 0; k < g.cardinality; ++k) total += s.data()[g.offset + k];
    CHECK(total == doctest::Approx(1.0f));
  }
  CHECK_THROWS_AS(search::smoothed_input(ad::Tensor(ad::Shape{1, 30}), 1.0f), Error);
}

TEST_CASE("loss is zero when the target is the imitator output itself") {
  Nets<double> nets;
  const auto m = nets.models();
  std::mt19937_64 rng(5);
  const auto p = render::sample_params(rng);
  const ad::TensorD x(ad::Shape{1, 34}, std::vector<double>(p.values.begin(), p.values.end()));
  const auto target = nets.g.forward(search::smoothed_input(x, 100.0), ad::Mode::eval);
  const auto measured = search::measure_target(target, m);
  const auto loss = search::loss_ls(x, measured, m, SearchConfig{});
  CHECK(std::abs(loss.parts.l1) < 1e-12);
  CHECK(loss.parts.l2 == 0.0);
  CHECK(std::abs(loss.parts.ls) < 1e-12);
}

TEST_CASE("alpha zero and single-term configurations select the right loss") {
  Nets<double> nets;
  const auto m = nets.models();
  const auto measured = search::measure_target(image_to_tensor<double>(sample_face(8)), m);
  const auto p = render::ParamVector::average_face();
  const ad::TensorD x(ad::Shape{1, 34}, std::vector<double>(p.values.begin(), p.values.end()));
  SearchConfig cfg;
  const auto both = search::loss_ls(x, measured, m, cfg);
  CHECK(both.parts.ls == doctest::Approx(cfg.alpha * both.parts.l1 + both.parts.l2));
  cfg.alpha = 0;
  CHECK(search::loss_ls(x, measured, m, cfg).parts.ls == doctest::Approx(both.parts.l2));
  cfg = SearchConfig{};
  cfg.use_content = false;
  CHECK(search::loss_ls(x, measured, m, cfg).parts.ls == doctest::Approx(cfg.alpha * both.parts.l1));
  cfg.use_identity = false;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("composite gradient of the search loss matches finite differences") {
  Nets<double> nets;
  std::mt19937_64 rng(21);
  const auto x = render::sample_params(rng);
  CHECK(search::composite_gradient_error(nets.models(), x, sample_face(9), SearchConfig{}) <= 1e-2);
}

TEST_CASE("zero iterations return the average face") {
  Nets<float> nets;
  SearchConfig cfg;
  cfg.max_iters = 0;
  const auto result = search::create(sample_face(4), cfg, nets.models());
  CHECK(result.x == search::initial_params());
  CHECK(result.trace.size() == 1);
  CHECK(result.status == search::Status::success);
}

TEST_CASE("search stays feasible and leaves the networks untouched") {
  Nets<float> nets;
  const auto before = encode_checkpoint_like(nets);
  SearchConfig cfg;
  cfg.max_iters = 6;
  cfg.lr_scale = 1000;
  const auto result = search::create(sample_face(11), cfg, nets.models());
  CHECK(result.trace.size() == 7);
  for (const auto& r : result.trace) CHECK(r.x.in_range());
  CHECK(result.x.in_range());
  CHECK(encode_checkpoint_like(nets) == before);
  CHECK(result.trace[5].lr == doctest::Approx(cfg.lr_at(5)));
  CHECK(cfg.lr_at(5) == doctest::Approx(cfg.learning_rate * cfg.lr_scale * 0.8));
}

TEST_CASE("parameter files round trip and reject schema problems") {
  std::mt19937_64 rng(2);
  auto x = render::sample_params(rng);
  x[render::kContinuous] = 0.7f;
  const auto doc = search::params_to_json(x);
  CHECK(search::params_from_json(doc) == x);
  CHECK(doc["discrete"]["hair_style"]["selected"] == x.selected(0));
  CHECK(doc["schema_version"] == search::kParamsSchemaVersion);

  auto bad = doc;
  bad["schema_hash"] = "00000000";
  CHECK_THROWS_WITH_AS(search::params_from_json(bad), doctest::Contains("schema hash mismatch"), Error);
  bad = doc;
  bad["discrete"].erase("brow_style");
  CHECK_THROWS_WITH_AS(search::params_from_json(bad), doctest::Contains("brow_style"), Error);
  bad = doc;
  bad["continuous"]["eye_width"] = 1.5;
  CHECK_THROWS_WITH_AS(search::params_from_json(bad), doctest::Contains("eye_width"), Error);
}
