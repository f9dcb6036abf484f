#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "f2p/extractors/networks.hpp"
#include "f2p/imitator/imitator.hpp"
#include "f2p/renderer/image.hpp"
#include "f2p/renderer/schema.hpp"

namespace f2p::search {

struct SearchConfig {
  double alpha = 0.01;
  double beta = 100.0;
  std::size_t max_iters = 50;
  double learning_rate = 10.0;
  double lr_scale = 1.0;
  double lr_decay = 0.2;  // fractional drop applied every decay_every iterations
  std::size_t decay_every = 5;
  bool use_identity = true;  // L1 term
  bool use_content = true;   // L2 term

  double lr_at(std::size_t iter) const;
  void validate() const;
};

/// Frozen networks consumed by the search, in any scalar type.
template <typename T>
struct Models {
  const imitator::ImitatorNet<T>& g;
  const extractors::RecognizerNet<T>& f1;
  const extractors::SegmenterNet<T>& f2;
};

/// Softmax of beta·logits along the last axis.
template <typename T>
ad::BasicTensor<T> smooth_discrete(const ad::BasicTensor<T>& logits, T beta);

/// 1×34 raw parameters → 1×34 imitator input: continuous block unchanged,
/// each discrete block smoothed.
template <typename T>
ad::BasicTensor<T> smoothed_input(const ad::BasicTensor<T>& x, T beta);

/// Constant measurements of the target image.
template <typename T>
struct TargetFeatures {
  ad::BasicTensor<T> embedding;  // F1(t)
  ad::BasicTensor<T> content;    // ω(t)·F2(t)
};

template <typename T>
TargetFeatures<T> measure_target(const ad::BasicTensor<T>& target, const Models<T>& models);

struct LossBreakdown {
  double l1 = 0, l2 = 0, ls = 0;
};

template <typename T>
struct LossValue {
  ad::BasicTensor<T> ls;
  LossBreakdown parts;
};

/// L_S = alpha·(1 − cos(F1(G), F1(t))) + mean|ω(G)·F2(G) − ω(t)·F2(t)| with
/// G = G(smoothed_input(x)).
template <typename T>
LossValue<T> loss_ls(const ad::BasicTensor<T>& x, const TargetFeatures<T>& target, const Models<T>& models,
                     const SearchConfig& cfg);

struct TraceRecord {
  std::size_t iter;
  LossBreakdown loss;
  double lr;
  render::ParamVector x;
};

enum class Status { success, no_improvement };

std::string to_string(Status s);

struct SearchResult {
  render::ParamVector x;
  std::vector<TraceRecord> trace;  // initial point first
  Status status = Status::success;
};

/// Continuous sliders at 0.5, discrete logits at 0.
render::ParamVector initial_params();

/// Projected gradient descent from the average face. Throws
/// "non-finite gradient at iteration N".
SearchResult create(const render::Image& target, const SearchConfig& cfg, const Models<float>& models);

/// ‖analytic − central-difference‖ / ‖central-difference‖ for ∂L_S/∂x at `x`,
/// in double precision.
double composite_gradient_error(const Models<double>& models, const render::ParamVector& x,
                                const render::Image& target, const SearchConfig& cfg, double h = 1e-4);

}  // namespace f2p::search
