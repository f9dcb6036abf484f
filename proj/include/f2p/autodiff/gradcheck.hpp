#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "f2p/autodiff/tensor.hpp"

namespace f2p::ad {

template <typename T>
using ScalarFn = std::function<BasicTensor<T>(const std::vector<BasicTensor<T>>&)>;

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0;
  double tolerance = 0;
  bool passed = false;
};

/// Largest element-wise |analytic − numeric| / max(|analytic|, floor) over all
/// inputs that require a gradient, with numeric gradients from central
/// differences of step `h`.
template <typename T>
double max_relative_error(const ScalarFn<T>& fn, const std::vector<BasicTensor<T>>& inputs,
                          double h = 1e-3, double floor = 1e-4);

/// Finite-difference check of every differentiable op, run in double
/// precision. `fault` names an op whose backward pass is deliberately
/// corrupted, which must then be reported as failing.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed, const std::string& fault = {},
                                                 double tolerance = 1e-3);

}  // namespace f2p::ad
