#include "f2p/common/train_config.hpp"

#include <algorithm>
#include <cmath>

namespace f2p {

double TrainConfig::lr_at(std::size_t epoch) const {
  return learning_rate * std::pow(1.0 - lr_decay, static_cast<double>(epoch / decay_every));
}

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || decay_every == 0)
    throw Error("epochs, batch size and decay period must be positive");
  if (!(learning_rate > 0) || !(momentum >= 0 && momentum < 1)) throw Error("invalid learning rate or momentum");
  if (!(lr_decay > 0 && lr_decay < 1)) throw Error("lr decay must lie in (0,1)");
}

StateSnapshot snapshot_state(const ad::StateList<float>& state) {
  StateSnapshot out;
  for (const auto& e : state) out.emplace_back(e.tensor.data().begin(), e.tensor.data().end());
  return out;
}

void restore_state(const ad::StateList<float>& state, const StateSnapshot& values) {
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto t = state[i].tensor;
    std::copy(values[i].begin(), values[i].end(), t.data().begin());
  }
}

}  // namespace f2p
