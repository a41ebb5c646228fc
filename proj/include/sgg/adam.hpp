#pragma once

#include <cstddef>
#include <vector>

#include "sgg/grad_check.hpp"

namespace sgg {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::size_t step = 0;
  std::vector<std::vector<double>> m;  // first moments, one per parameter
  std::vector<std::vector<double>> v;  // second moments
};

OptimizerState make_optimizer(const AdamConfig& config, const std::vector<NamedParam>& params);

// One bias-corrected Adam update from each parameter's current gradient.
// Parameters without a gradient buffer are treated as having zero gradient.
void adam_step(const std::vector<NamedParam>& params, OptimizerState& state);

}  // namespace sgg
