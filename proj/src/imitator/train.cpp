#include "f2p/imitator/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "f2p/cli/checkpoint.hpp"
#include "f2p/common/image_tensor.hpp"
#include "f2p/renderer/seed.hpp"

namespace f2p::imitator {

namespace {

struct Batch {
  ad::Tensor params, images;
};

Batch make_batch(const render::Dataset& data, std::span<const std::size_t> indices) {
  std::vector<const render::ParamVector*> params;
  std::vector<const render::Image*> images;
  for (auto i : indices) {
    params.push_back(&data.samples[i].params);
    images.push_back(&data.samples[i].image);
  }
  return {params_to_tensor<float>(params), images_to_tensor<float>(images)};
}

}  // namespace

std::string EpochRecord::json() const {
  return nlohmann::json{{"epoch", epoch}, {"train_l1", train_l1}, {"val_l1", val_l1}, {"lr", lr}}.dump();
}

double mean_image_baseline(const render::Dataset& data) {
  if (data.train.empty() || data.validation.empty()) throw Error("baseline needs train and validation samples");
  const auto& first = data.samples[data.train.front()].image;
  std::vector<double> mean(first.pixels.size(), 0.0);
  for (auto i : data.train) {
    const auto& px = data.samples[i].image.pixels;
    for (std::size_t k = 0; k < px.size(); ++k) mean[k] += px[k];
  }
  for (auto& m : mean) m /= static_cast<double>(data.train.size());
  double total = 0;
  for (auto i : data.validation) {
    const auto& px = data.samples[i].image.pixels;
    for (std::size_t k = 0; k < px.size(); ++k) total += std::abs(px[k] - mean[k]);
  }
  return total / static_cast<double>(data.validation.size() * mean.size());
}

double evaluate_l1(const ImitatorNet<float>& net, const render::Dataset& data,
                   const std::vector<std::size_t>& indices, std::size_t batch_size) {
  if (indices.empty()) throw Error("evaluate_l1: no samples");
  ad::NoGradGuard guard;
  double total = 0;
  for (std::size_t b = 0; b < indices.size(); b += batch_size) {
    const auto chunk = std::span(indices).subspan(b, std::min(batch_size, indices.size() - b));
    const auto batch = make_batch(data, chunk);
    total += ad::l1_loss(net.forward(batch.params, ad::Mode::eval), batch.images).item() * chunk.size();
  }
  return total / static_cast<double>(indices.size());
}

ImitatorReport train_imitator(ImitatorNet<float>& net, const render::Dataset& data, const TrainConfig& cfg,
                              const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.train.empty()) throw Error("empty dataset: no training samples");
  if (data.validation.empty()) throw Error("empty dataset: no validation samples");
  const auto start = std::chrono::steady_clock::now();

  ImitatorReport report;
  report.baseline_l1 = mean_image_baseline(data);
  const auto state = net.state();
  ad::Sgd<float> opt(state, cfg.momentum);
  StateSnapshot best;
  std::vector<std::size_t> order = data.train;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(render::item_seed(cfg.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.lr_at(epoch);
    double total = 0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t size = std::min(cfg.batch_size, order.size() - b);
      if (size < 2 && seen > 0) break;  // a lone sample gives degenerate batch statistics
      const auto batch = make_batch(data, std::span(order).subspan(b, size));
      opt.zero_grad();
      auto loss = ad::l1_loss(net.forward(batch.params, ad::Mode::train), batch.images);
      const double value = loss.item();
      if (!std::isfinite(value)) throw Divergence("divergence at epoch " + std::to_string(epoch));
      ad::backward(loss);
      opt.step(lr);
      total += value * size;
      seen += size;
    }
    const EpochRecord record{epoch, total / seen, evaluate_l1(net, data, data.validation), lr};
    if (!std::isfinite(record.val_l1)) throw Divergence("divergence at epoch " + std::to_string(epoch));
    report.history.push_back(record);
    if (epoch == 0 || record.val_l1 < report.best_val_l1) {
      report.best_val_l1 = record.val_l1;
      report.best_epoch = epoch;
      best = snapshot_state(state);
    }
    if (on_epoch) on_epoch(record);
  }
  restore_state(state, best);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Imitator load_imitator(const std::filesystem::path& path) {
  Imitator net;
  load_checkpoint(path, net.state());
  ad::freeze(net);
  return net;
}

}  // namespace f2p::imitator
