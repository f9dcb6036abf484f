#pragma once

#include <cstdint>
#include <vector>

#include "f2p/autodiff/nn.hpp"

namespace f2p {

/// SGD schedule shared by the three Stage I trainers.
struct TrainConfig {
  std::size_t epochs = 500;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double lr_decay = 0.1;  // fractional drop applied every decay_every epochs
  std::size_t decay_every = 50;
  std::uint64_t seed = 0;

  double lr_at(std::size_t epoch) const;
  void validate() const;
};

using StateSnapshot = std::vector<std::vector<float>>;

StateSnapshot snapshot_state(const ad::StateList<float>& state);
void restore_state(const ad::StateList<float>& state, const StateSnapshot& values);

}  // namespace f2p
