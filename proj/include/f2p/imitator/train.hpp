#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "f2p/common/train_config.hpp"
#include "f2p/imitator/imitator.hpp"
#include "f2p/renderer/dataset.hpp"

namespace f2p::imitator {

struct EpochRecord {
  std::size_t epoch;
  double train_l1, val_l1, lr;

  std::string json() const;
};

struct ImitatorReport {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_l1 = 0, baseline_l1 = 0, seconds = 0;

  bool beats_baseline(double ratio = 0.3) const { return best_val_l1 < ratio * baseline_l1; }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean L1 between each validation render and the pixel-wise mean of the
/// training renders.
double mean_image_baseline(const render::Dataset& data);

/// Mean per-pixel L1 of G(x) (eval mode, unclamped) against the renders at
/// `indices`.
double evaluate_l1(const ImitatorNet<float>& net, const render::Dataset& data,
                   const std::vector<std::size_t>& indices, std::size_t batch_size = 50);

/// SGD-momentum training on L1; the net is left holding the weights of the
/// best validation epoch. Throws "divergence at epoch N" on a non-finite loss.
ImitatorReport train_imitator(ImitatorNet<float>& net, const render::Dataset& data, const TrainConfig& cfg,
                              const EpochCallback& on_epoch = {});

using Imitator = ImitatorNet<float>;

Imitator load_imitator(const std::filesystem::path& path);

}  // namespace f2p::imitator
