#include "f2p/extractors/extractors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>

#include "f2p/cli/checkpoint.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/renderer/seed.hpp"

namespace f2p::extractors {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
void for_batches(std::vector<std::size_t>& order, std::size_t batch_size, Fn&& fn) {
  for (std::size_t b = 0; b < order.size(); b += batch_size) {
    const std::size_t size = std::min(batch_size, order.size() - b);
    if (size < 2 && b > 0) break;  // a lone sample gives degenerate batch statistics
    fn(std::span<const std::size_t>(order).subspan(b, size));
  }
}

std::vector<std::int32_t> downsampled_targets(const std::vector<const render::LabelMap*>& labels) {
  std::vector<std::int32_t> out;
  for (const auto* map : labels) {
    const auto small = render::downsample_labels(*map, render::kImageSize / kFeatureSize);
    out.insert(out.end(), small.classes.begin(), small.classes.end());
  }
  return out;
}

void check_finite(double value, std::size_t epoch) {
  if (!std::isfinite(value)) throw Divergence("divergence at epoch " + std::to_string(epoch));
}

}  // namespace

ad::Tensor embed(const Recognizer& f1, const ad::Tensor& image) { return f1.embed(image, ad::Mode::eval); }

ad::Tensor embed(const Recognizer& f1, const render::Image& image) {
  return embed(f1, image_to_tensor<float>(image));
}

ContentFeatures features_and_weights(const Segmenter& f2, const ad::Tensor& image) {
  auto [features, weights] = content_features(f2, image);
  return {std::move(features), std::move(weights)};
}

std::string RecognizerEpoch::json() const {
  return nlohmann::json{{"epoch", epoch}, {"train_loss", train_loss}, {"heldout_accuracy", heldout_accuracy}, {"lr", lr}}
      .dump();
}

std::string SegmenterEpoch::json() const {
  return nlohmann::json{{"epoch", epoch}, {"train_loss", train_loss}, {"mean_iou", mean_iou}, {"lr", lr}}.dump();
}

std::vector<std::size_t> heldout_views(const render::IdentitySet& corpus) {
  std::vector<std::size_t> out;
  const std::size_t views = corpus.views_per_identity, train = views * 3 / 4;
  for (std::size_t i = 0; i < corpus.images.size(); ++i)
    if (i % views >= train) out.push_back(i);
  return out;
}

double recognizer_accuracy(const Recognizer& net, const render::IdentitySet& corpus,
                           const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  ad::NoGradGuard guard;
  std::size_t correct = 0;
  for (std::size_t b = 0; b < indices.size(); b += 50) {
    std::vector<const render::Image*> images;
    for (std::size_t i = b; i < std::min(indices.size(), b + 50); ++i) images.push_back(&corpus.images[indices[i]]);
    const auto logits = net.logits(net.embed(images_to_tensor<float>(images), ad::Mode::eval));
    const std::size_t k = logits.dim(1);
    const auto data = logits.data();
    for (std::size_t n = 0; n < images.size(); ++n) {
      const auto row = data.subspan(n * k, k);
      const auto pred = static_cast<std::int32_t>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += pred == corpus.labels[indices[b + n]];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

RecognizerReport train_recognizer(Recognizer& net, const render::IdentitySet& corpus, const TrainConfig& cfg,
                                  const std::function<void(const RecognizerEpoch&)>& on_epoch) {
  cfg.validate();
  if (corpus.prototypes.size() < 2) throw Error("identity corpus needs at least 2 identities");
  if (corpus.views_per_identity < 2) throw Error("identity corpus needs at least 2 views per identity");
  if (net.identities() != corpus.prototypes.size()) throw Error("recognizer head does not match the corpus");
  const auto start = Clock::now();

  const std::size_t train_views = corpus.views_per_identity * 3 / 4;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < corpus.images.size(); ++i)
    if (i % corpus.views_per_identity < train_views) order.push_back(i);
  const auto heldout = heldout_views(corpus);

  RecognizerReport report;
  ad::Sgd<float> opt(net.state(), cfg.momentum);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(render::item_seed(cfg.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.lr_at(epoch);
    double total = 0;
    std::size_t seen = 0;
    for_batches(order, cfg.batch_size, [&](std::span<const std::size_t> idx) {
      std::vector<const render::Image*> images;
      std::vector<std::int32_t> labels;
      for (auto i : idx) {
        images.push_back(&corpus.images[i]);
        labels.push_back(corpus.labels[i]);
      }
      opt.zero_grad();
      auto loss = ad::cross_entropy(net.logits(net.embed(images_to_tensor<float>(images), ad::Mode::train)),
                                    std::span<const std::int32_t>(labels));
      check_finite(loss.item(), epoch);
      ad::backward(loss);
      opt.step(lr);
      total += loss.item() * idx.size();
      seen += idx.size();
    });
    const RecognizerEpoch record{epoch, total / seen, recognizer_accuracy(net, corpus, heldout), lr};
    report.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  report.heldout_accuracy = report.history.back().heldout_accuracy;
  report.seconds = seconds_since(start);
  return report;
}

bool SegmenterReport::meets(double mean_target, double part_target) const {
  using render::Region;
  if (mean_iou < mean_target) return false;
  for (auto r : {Region::eye, Region::nose, Region::mouth})
    if (class_iou[static_cast<std::size_t>(r)] < part_target) return false;
  return true;
}

double mean_of(const ClassIou& iou) {
  double total = 0;
  for (double v : iou) total += v;
  return total / static_cast<double>(iou.size());
}

ClassIou segmentation_iou(const Segmenter& net, const std::vector<const render::Image*>& images,
                          const std::vector<const render::LabelMap*>& labels) {
  if (images.size() != labels.size()) throw Error("segmentation_iou: images and labels differ in count");
  ad::NoGradGuard guard;
  std::array<std::size_t, render::kNumClasses> inter{}, uni{};
  for (std::size_t b = 0; b < images.size(); b += 50) {
    const std::size_t end = std::min(images.size(), b + 50);
    const std::vector<const render::Image*> batch(images.begin() + b, images.begin() + end);
    const std::vector<const render::LabelMap*> truth_maps(labels.begin() + b, labels.begin() + end);
    const auto truth = downsampled_targets(truth_maps);
    const auto logits = net.logits(net.features(images_to_tensor<float>(batch), ad::Mode::eval));
    const auto data = logits.data();
    const std::size_t plane = kFeatureSize * kFeatureSize, k = render::kNumClasses;
    for (std::size_t n = 0; n < batch.size(); ++n)
      for (std::size_t p = 0; p < plane; ++p) {
        std::size_t pred = 0;
        for (std::size_t c = 1; c < k; ++c)
          if (data[(n * k + c) * plane + p] > data[(n * k + pred) * plane + p]) pred = c;
        const auto t = static_cast<std::size_t>(truth[n * plane + p]);
        if (pred == t) {
          ++inter[t];
          ++uni[t];
        } else {
          ++uni[t];
          ++uni[pred];
        }
      }
  }
  ClassIou iou{};
  for (std::size_t c = 0; c < iou.size(); ++c)
    iou[c] = uni[c] ? static_cast<double>(inter[c]) / static_cast<double>(uni[c]) : 1.0;
  return iou;
}

SegmenterReport train_segmenter(Segmenter& net, const render::Dataset& data, const TrainConfig& cfg,
                                const std::function<void(const SegmenterEpoch&)>& on_epoch) {
  cfg.validate();
  if (data.train.empty() || data.validation.empty()) throw Error("empty dataset: train and validation required");
  const auto start = Clock::now();
  std::vector<const render::Image*> val_images;
  std::vector<const render::LabelMap*> val_labels;
  for (auto i : data.validation) {
    val_images.push_back(&data.samples[i].image);
    val_labels.push_back(&data.samples[i].labels);
  }

  SegmenterReport report;
  ad::Sgd<float> opt(net.state(), cfg.momentum);
  std::vector<std::size_t> order = data.train;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(render::item_seed(cfg.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.lr_at(epoch);
    double total = 0;
    std::size_t seen = 0;
    for_batches(order, cfg.batch_size, [&](std::span<const std::size_t> idx) {
      std::vector<const render::Image*> images;
      std::vector<const render::LabelMap*> labels;
      for (auto i : idx) {
        images.push_back(&data.samples[i].image);
        labels.push_back(&data.samples[i].labels);
      }
      const auto targets = downsampled_targets(labels);
      opt.zero_grad();
      auto loss = ad::cross_entropy(net.logits(net.features(images_to_tensor<float>(images), ad::Mode::train)),
                                    std::span<const std::int32_t>(targets));
      check_finite(loss.item(), epoch);
      ad::backward(loss);
      opt.step(lr);
      total += loss.item() * idx.size();
      seen += idx.size();
    });
    report.class_iou = segmentation_iou(net, val_images, val_labels);
    report.mean_iou = mean_of(report.class_iou);
    const SegmenterEpoch record{epoch, total / seen, report.mean_iou, lr};
    report.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  report.seconds = seconds_since(start);
  return report;
}

Recognizer load_recognizer(const std::filesystem::path& path) {
  const auto tensors = read_checkpoint(path);
  const auto head = std::find_if(tensors.begin(), tensors.end(), [](const auto& t) { return t.name == "head.bias"; });
  if (head == tensors.end() || head->shape.size() != 1)
    throw Error(path.string() + ": checkpoint mismatch at tensor 'head.bias'");
  Recognizer net(head->shape[0], 0);
  try {
    assign_checkpoint(tensors, net.state());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  ad::freeze(net);
  return net;
}

Segmenter load_segmenter(const std::filesystem::path& path) {
  Segmenter net(0);
  load_checkpoint(path, net.state());
  ad::freeze(net);
  return net;
}

}  // namespace f2p::extractors
