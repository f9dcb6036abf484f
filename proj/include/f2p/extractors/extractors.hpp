#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "f2p/common/train_config.hpp"
#include "f2p/extractors/networks.hpp"
#include "f2p/renderer/dataset.hpp"

namespace f2p::extractors {

using Recognizer = RecognizerNet<float>;
using Segmenter = SegmenterNet<float>;

/// 1×32 identity embedding of an N=1 image batch, eval mode. Gradients flow
/// to `image` when it requires them.
ad::Tensor embed(const Recognizer& f1, const ad::Tensor& image);
ad::Tensor embed(const Recognizer& f1, const render::Image& image);

struct ContentFeatures {
  ad::Tensor features;  // N×64×16×16
  ad::Tensor weights;   // N×1×16×16, P(eye)+P(nose)+P(mouth)
};

ContentFeatures features_and_weights(const Segmenter& f2, const ad::Tensor& image);

struct RecognizerEpoch {
  std::size_t epoch;
  double train_loss, heldout_accuracy, lr;
  std::string json() const;
};

struct RecognizerReport {
  std::vector<RecognizerEpoch> history;
  double heldout_accuracy = 0, seconds = 0;
};

/// Views [0, 3/4·views) of each identity train the net; the rest are held
/// out for the reported top-1 accuracy.
RecognizerReport train_recognizer(Recognizer& net, const render::IdentitySet& corpus, const TrainConfig& cfg,
                                  const std::function<void(const RecognizerEpoch&)>& on_epoch = {});

std::vector<std::size_t> heldout_views(const render::IdentitySet& corpus);
double recognizer_accuracy(const Recognizer& net, const render::IdentitySet& corpus,
                           const std::vector<std::size_t>& indices);

struct SegmenterEpoch {
  std::size_t epoch;
  double train_loss, mean_iou, lr;
  std::string json() const;
};

using ClassIou = std::array<double, render::kNumClasses>;

struct SegmenterReport {
  std::vector<SegmenterEpoch> history;
  ClassIou class_iou{};
  double mean_iou = 0, seconds = 0;
  bool meets(double mean_target = 0.5, double part_target = 0.4) const;
};

/// Pixel-wise cross entropy against labels reduced to 16×16 by plurality vote.
SegmenterReport train_segmenter(Segmenter& net, const render::Dataset& data, const TrainConfig& cfg,
                                const std::function<void(const SegmenterEpoch&)>& on_epoch = {});

/// Dataset-level intersection over union per class at 16×16. A class absent
/// from both prediction and truth scores 1.
ClassIou segmentation_iou(const Segmenter& net, const std::vector<const render::Image*>& images,
                          const std::vector<const render::LabelMap*>& labels);
double mean_of(const ClassIou& iou);

Recognizer load_recognizer(const std::filesystem::path& path);
Segmenter load_segmenter(const std::filesystem::path& path);

}  // namespace f2p::extractors
