#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "f2p/cli/checkpoint.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/extractors/extractors.hpp"
#include "f2p/renderer/dataset.hpp"
#include "f2p/renderer/render.hpp"

using namespace f2p;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny_config(double lr) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.learning_rate = lr;
  cfg.seed = 2;
  return cfg;
}

}  // namespace

TEST_CASE("recognizer embeds to 32 dimensions and segmenter features are 64x16x16") {
  extractors::Recognizer f1(5, 1);
  extractors::Segmenter f2(1);
  const auto face = render::render(render::ParamVector::average_face()).image;
  CHECK(extractors::embed(f1, face).shape() == ad::Shape{1, 32});
  const auto cf = extractors::features_and_weights(f2, image_to_tensor<float>(face));
  CHECK(cf.features.shape() == ad::Shape{1, 64, 16, 16});
  CHECK(cf.weights.shape() == ad::Shape{1, 1, 16, 16});
  CHECK(f2.logits(cf.features).shape() == ad::Shape{1, 7, 16, 16});
  for (float w : cf.weights.data()) {
    CHECK(w >= 0.0f);
    CHECK(w <= 1.0f);
  }
}

TEST_CASE("embeddings are deterministic in eval mode") {
  extractors::Recognizer f1(5, 3);
  std::mt19937_64 rng(4);
  const auto face = render::render(render::sample_params(rng)).image;
  const auto a = extractors::embed(f1, face), b = extractors::embed(f1, face);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST_CASE("untrained recognizer is near chance on held-out views") {
  const auto corpus = render::sample_identities(10, 8, 6);
  extractors::Recognizer f1(10, 1);
  const auto heldout = extractors::heldout_views(corpus);
  CHECK(heldout.size() == 20);
  CHECK(extractors::recognizer_accuracy(f1, corpus, heldout) <= 0.4);
}

TEST_CASE("recognizer training lowers the loss") {
  const auto corpus = render::sample_identities(6, 8, 6);
  extractors::Recognizer f1(6, 1);
  const auto report = extractors::train_recognizer(f1, corpus, tiny_config(0.01));
  REQUIRE(report.history.size() == 3);
  CHECK(report.history.back().train_loss < report.history.front().train_loss);
  CHECK(report.heldout_accuracy == report.history.back().heldout_accuracy);
}

TEST_CASE("recognizer rejects degenerate corpora and mismatched heads") {
  CHECK_THROWS_WITH_AS(render::sample_identities(1, 8, 6), doctest::Contains("at least 2 identities"), Error);
  const auto corpus = render::sample_identities(3, 4, 6);
  extractors::Recognizer wrong(5, 1);
  CHECK_THROWS_WITH_AS(extractors::train_recognizer(wrong, corpus, tiny_config(0.01)),
                       doctest::Contains("does not match"), Error);
}

TEST_CASE("segmentation IoU counts absent classes as perfect and is bounded") {
  const auto data = render::sample_dataset(10, 8);
  extractors::Segmenter f2(2);
  std::vector<const render::Image*> images;
  std::vector<const render::LabelMap*> labels;
  for (const auto& s : data.samples) {
    images.push_back(&s.image);
    labels.push_back(&s.labels);
  }
  const auto iou = extractors::segmentation_iou(f2, images, labels);
  for (double v : iou) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(extractors::mean_of(iou) == doctest::Approx((iou[0] + iou[1] + iou[2] + iou[3] + iou[4] + iou[5] + iou[6]) / 7));
  CHECK_THROWS_AS(extractors::segmentation_iou(f2, images, {}), Error);
}

TEST_CASE("segmenter training lowers the loss") {
  const auto data = render::sample_dataset(40, 8);
  extractors::Segmenter f2(2);
  const auto report = extractors::train_segmenter(f2, data, tiny_config(0.01));
  REQUIRE(report.history.size() == 3);
  CHECK(report.history.back().train_loss < report.history.front().train_loss);
  CHECK(report.mean_iou == doctest::Approx(extractors::mean_of(report.class_iou)));
}

TEST_CASE("extractor checkpoints round trip and infer the identity count") {
  extractors::Recognizer f1(7, 4);
  extractors::Segmenter f2(4);
  const auto p1 = fs::temp_directory_path() / "f2p_test_f1.f2pc";
  const auto p2 = fs::temp_directory_path() / "f2p_test_f2.f2pc";
  save_checkpoint(p1, f1.state());
  save_checkpoint(p2, f2.state());
  const auto g1 = extractors::load_recognizer(p1);
  const auto g2 = extractors::load_segmenter(p2);
  CHECK(g1.identities() == 7);
  CHECK(encode_checkpoint(g1.state()) == encode_checkpoint(f1.state()));
  CHECK(encode_checkpoint(g2.state()) == encode_checkpoint(f2.state()));
  CHECK_THROWS_WITH_AS(extractors::load_segmenter(p1), doctest::Contains("checkpoint mismatch"), Error);
  fs::remove(p1);
  fs::remove(p2);
}
