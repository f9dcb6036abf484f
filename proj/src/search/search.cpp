#include "f2p/search/search.hpp"

#include <algorithm>
#include <cmath>

#include "f2p/common/image_tensor.hpp"

namespace f2p::search {

using render::kContinuous;
using render::kDimension;

double SearchConfig::lr_at(std::size_t iter) const {
  return learning_rate * lr_scale * std::pow(1.0 - lr_decay, static_cast<double>(iter / decay_every));
}

void SearchConfig::validate() const {
  if (!(alpha >= 0)) throw Error("alpha must be non-negative");
  if (!(beta > 0)) throw Error("beta must be positive");
  if (!(learning_rate > 0) || !(lr_scale > 0)) throw Error("learning rate must be positive");
  if (!(lr_decay >= 0 && lr_decay < 1) || decay_every == 0) throw Error("invalid learning-rate decay");
  if (!use_identity && !use_content) throw Error("at least one loss term must be enabled");
}

std::string to_string(Status s) { return s == Status::success ? "success" : "no-improvement"; }

template <typename T>
ad::BasicTensor<T> smooth_discrete(const ad::BasicTensor<T>& logits, T beta) {
  if (logits.rank() == 0) throw Error("smooth_discrete: expected a block of logits");
  return ad::softmax(ad::scale(logits, beta), logits.rank() - 1);
}

template <typename T>
ad::BasicTensor<T> smoothed_input(const ad::BasicTensor<T>& x, T beta) {
  if (x.shape() != ad::Shape{1, kDimension}) throw Error("smoothed_input: expected 1×34 parameters");
  std::vector<ad::BasicTensor<T>> parts{ad::slice(x, 1, 0, kContinuous)};
  for (const auto& g : render::ParamSchema::groups())
    parts.push_back(smooth_discrete(ad::slice(x, 1, g.offset, g.offset + g.cardinality), beta));
  return ad::concat(parts, 1);
}

template <typename T>
TargetFeatures<T> measure_target(const ad::BasicTensor<T>& target, const Models<T>& models) {
  ad::NoGradGuard guard;
  auto [features, weights] = extractors::content_features(models.f2, target);
  return {models.f1.embed(target, ad::Mode::eval), ad::mul_channels(features, weights)};
}

template <typename T>
LossValue<T> loss_ls(const ad::BasicTensor<T>& x, const TargetFeatures<T>& target, const Models<T>& models,
                     const SearchConfig& cfg) {
  const auto image = models.g.forward(smoothed_input(x, static_cast<T>(cfg.beta)), ad::Mode::eval);
  const auto l1 = ad::sub(ad::BasicTensor<T>::scalar(T(1)), ad::cosine(models.f1.embed(image, ad::Mode::eval), target.embedding));
  auto [features, weights] = extractors::content_features(models.f2, image);
  const auto l2 = ad::l1_loss(ad::mul_channels(features, weights), target.content);

  ad::BasicTensor<T> ls;
  if (cfg.use_identity && cfg.use_content)
    ls = ad::add(ad::scale(l1, static_cast<T>(cfg.alpha)), l2);
  else if (cfg.use_identity)
    ls = ad::scale(l1, static_cast<T>(cfg.alpha));
  else
    ls = l2;
  return {ls, {l1.item(), l2.item(), ls.item()}};
}

render::ParamVector initial_params() { return render::ParamVector::average_face(); }

namespace {

render::ParamVector to_params(std::span<const float> values) {
  render::ParamVector p;
  std::copy(values.begin(), values.end(), p.values.begin());
  return p;
}

}  // namespace

SearchResult create(const render::Image& target, const SearchConfig& cfg, const Models<float>& models) {
  cfg.validate();
  if (target.height != render::kImageSize || target.width != render::kImageSize || target.channels != 3)
    throw Error("target must be a 64×64 RGB image");
  ad::freeze(models.g);
  ad::freeze(models.f1);
  ad::freeze(models.f2);
  const auto measured = measure_target(image_to_tensor<float>(target), models);

  const auto init = initial_params();
  std::vector<float> x(init.values.begin(), init.values.end());
  SearchResult result;
  for (std::size_t iter = 0;; ++iter) {
    ad::Tensor leaf(ad::Shape{1, kDimension}, x, true);
    const bool last = iter == cfg.max_iters;
    auto loss = [&] {
      if (last) {
        ad::NoGradGuard guard;
        return loss_ls(leaf, measured, models, cfg);
      }
      return loss_ls(leaf, measured, models, cfg);
    }();
    const double lr = last ? 0.0 : cfg.lr_at(iter);
    result.trace.push_back({iter, loss.parts, lr, to_params(x)});
    if (last) break;
    if (!std::isfinite(loss.parts.ls)) throw Divergence("non-finite loss at iteration " + std::to_string(iter));
    ad::backward(loss.ls);
    const auto grad = leaf.grad();
    for (std::size_t i = 0; i < kDimension; ++i)
      if (!std::isfinite(grad[i])) throw Divergence("non-finite gradient at iteration " + std::to_string(iter));
    for (std::size_t i = 0; i < kDimension; ++i)
      x[i] = std::clamp(x[i] - static_cast<float>(lr) * grad[i], 0.0f, 1.0f);
  }
  result.x = to_params(x);
  result.status = result.trace.back().loss.ls <= result.trace.front().loss.ls ? Status::success
                                                                              : Status::no_improvement;
  return result;
}

double composite_gradient_error(const Models<double>& models, const render::ParamVector& x,
                                const render::Image& target, const SearchConfig& cfg, double h) {
  const auto measured = measure_target(image_to_tensor<double>(target), models);
  ad::TensorD leaf(ad::Shape{1, kDimension}, std::vector<double>(x.values.begin(), x.values.end()), true);
  const auto loss = [&](const ad::TensorD& at) { return loss_ls(at, measured, models, cfg).ls; };
  ad::backward(loss(leaf));
  const auto analytic = leaf.grad();

  double diff = 0, norm = 0;
  std::vector<double> probe(x.values.begin(), x.values.end());
  ad::NoGradGuard guard;
  for (std::size_t i = 0; i < kDimension; ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = loss(ad::TensorD(ad::Shape{1, kDimension}, probe)).item();
    probe[i] = saved - h;
    const double down = loss(ad::TensorD(ad::Shape{1, kDimension}, probe)).item();
    probe[i] = saved;
    const double numeric = (up - down) / (2 * h);
    diff += (analytic[i] - numeric) * (analytic[i] - numeric);
    norm += numeric * numeric;
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

#define F2P_INSTANTIATE_SEARCH(T)                                                                        \
  template ad::BasicTensor<T> smooth_discrete(const ad::BasicTensor<T>&, T);                            \
  template ad::BasicTensor<T> smoothed_input(const ad::BasicTensor<T>&, T);                             \
  template TargetFeatures<T> measure_target(const ad::BasicTensor<T>&, const Models<T>&);               \
  template LossValue<T> loss_ls(const ad::BasicTensor<T>&, const TargetFeatures<T>&, const Models<T>&, \
                                const SearchConfig&);

F2P_INSTANTIATE_SEARCH(float)
F2P_INSTANTIATE_SEARCH(double)

}  // namespace f2p::search
