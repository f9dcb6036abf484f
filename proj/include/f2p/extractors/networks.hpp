#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "f2p/autodiff/nn.hpp"
#include "f2p/renderer/image.hpp"

namespace f2p::extractors {

inline constexpr std::size_t kEmbeddingDim = 32;
inline constexpr std::size_t kFeatureChannels = 64;
inline constexpr std::size_t kFeatureSize = 16;

template <typename T>
struct ConvBnRelu {
  ad::Conv2d<T> conv;
  ad::BatchNorm<T> bn;

  ConvBnRelu() = default;
  ConvBnRelu(std::size_t in, std::size_t out, ad::Rng& rng) : conv(in, out, 3, 1, 1, rng), bn(out) {}

  ad::BasicTensor<T> operator()(const ad::BasicTensor<T>& x, ad::Mode mode) const {
    return ad::relu(bn(conv(x), mode));
  }

  void collect(const std::string& prefix, ad::StateList<T>& out) const {
    conv.collect(prefix + ".conv", out);
    bn.collect(prefix + ".bn", out);
  }
};

/// Identity embedder: four conv/pool stages (64→4), a 32-d linear embedding
/// and a training-only classification head over `identities` classes.
template <typename T>
class RecognizerNet {
 public:
  RecognizerNet(std::size_t identities, std::uint64_t seed) : identities_(identities) {
    ad::Rng rng(seed);
    const std::array<std::size_t, 5> ch{3, 32, 64, 128, 128};
    for (std::size_t i = 0; i < 4; ++i) blocks_[i] = ConvBnRelu<T>(ch[i], ch[i + 1], rng);
    embed_ = ad::Linear<T>(128 * 4 * 4, kEmbeddingDim, rng);
    head_ = ad::Linear<T>(kEmbeddingDim, identities, rng);
  }

  std::size_t identities() const { return identities_; }

  /// N×3×64×64 → N×32.
  ad::BasicTensor<T> embed(const ad::BasicTensor<T>& x, ad::Mode mode) const {
    auto h = x;
    for (const auto& block : blocks_) h = ad::maxpool2d(block(h, mode), 2, 2);
    return embed_(ad::reshape(h, ad::Shape{h.dim(0), h.numel() / h.dim(0)}));
  }

  ad::BasicTensor<T> logits(const ad::BasicTensor<T>& embedding) const { return head_(embedding); }

  ad::StateList<T> state() const {
    ad::StateList<T> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect("block" + std::to_string(i), out);
    embed_.collect("embed", out);
    head_.collect("head", out);
    return out;
  }

 private:
  std::size_t identities_;
  std::array<ConvBnRelu<T>, 4> blocks_;
  ad::Linear<T> embed_, head_;
};

/// Semantic segmenter at output stride 4: a 64×16×16 feature layer followed
/// by a 1×1 classifier over the seven region classes.
template <typename T>
class SegmenterNet {
 public:
  explicit SegmenterNet(std::uint64_t seed) {
    ad::Rng rng(seed);
    const std::array<std::size_t, 8> ch{3, 32, 32, 64, 64, 64, 64, 64};
    for (std::size_t i = 0; i < 7; ++i) blocks_[i] = ConvBnRelu<T>(ch[i], ch[i + 1], rng);
    classifier_ = ad::Conv2d<T>(kFeatureChannels, render::kNumClasses, 1, 1, 0, rng);
  }

  /// N×3×64×64 → N×64×16×16.
  ad::BasicTensor<T> features(const ad::BasicTensor<T>& x, ad::Mode mode) const {
    auto h = x;
    for (std::size_t i = 0; i < 7; ++i) {
      h = blocks_[i](h, mode);
      if (i == 1 || i == 3) h = ad::maxpool2d(h, 2, 2);
    }
    return h;
  }

  ad::BasicTensor<T> logits(const ad::BasicTensor<T>& features) const { return classifier_(features); }

  ad::StateList<T> state() const {
    ad::StateList<T> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect("block" + std::to_string(i), out);
    classifier_.collect("classifier", out);
    return out;
  }

 private:
  std::array<ConvBnRelu<T>, 7> blocks_;
  ad::Conv2d<T> classifier_;
};

/// Feature layer of `f2` and the eye-nose-mouth weight map: the summed
/// softmax probabilities of those three classes, N×1×16×16.
template <typename T>
std::pair<ad::BasicTensor<T>, ad::BasicTensor<T>> content_features(const SegmenterNet<T>& f2,
                                                                   const ad::BasicTensor<T>& image) {
  auto features = f2.features(image, ad::Mode::eval);
  const auto probs = ad::softmax(f2.logits(features), 1);
  const auto part = [&](render::Region r) {
    const auto c = static_cast<std::size_t>(r);
    return ad::slice(probs, 1, c, c + 1);
  };
  auto weights =
      ad::add(ad::add(part(render::Region::eye), part(render::Region::nose)), part(render::Region::mouth));
  return {std::move(features), std::move(weights)};
}

}  // namespace f2p::extractors
