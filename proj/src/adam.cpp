#include "sgg/adam.hpp"

#include <cmath>

#include "sgg/error.hpp"

namespace sgg {

OptimizerState make_optimizer(const AdamConfig& config, const std::vector<NamedParam>& params) {
  OptimizerState s;
  s.config = config;
  for (const auto& p : params) {
    s.m.emplace_back(p.tensor.size(), 0.0);
    s.v.emplace_back(p.tensor.size(), 0.0);
  }
  return s;
}

void adam_step(const std::vector<NamedParam>& params, OptimizerState& state) {
  if (params.size() != state.m.size() || params.size() != state.v.size())
    throw ShapeMismatch("optimizer tracks " + std::to_string(state.m.size()) + " parameters, got " +
                        std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k)
    if (params[k].tensor.size() != state.m[k].size() || params[k].tensor.size() != state.v[k].size())
      throw ShapeMismatch("moment size differs from parameter '" + params[k].name + "'");

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor w = params[k].tensor;
    if (!w.has_grad()) continue;
    auto g = w.grad();
    auto value = w.mutable_data();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / correct1;
      const double vhat = v[i] / correct2;
      value[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace sgg
