#include "sgg/layers.hpp"

#include <cmath>

#include "sgg/ops.hpp"

namespace sgg {

Tensor Linear::operator()(Tape& tape, const Tensor& x) const {
  Tensor y = matmul_nt(tape, x, weight);
  return bias.defined() ? add_bias(tape, y, bias) : y;
}

Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(std::move(shape), true);
  for (auto& v : t.mutable_data()) v = u(rng);
  return t;
}

Linear make_linear(std::size_t in, std::size_t out, bool with_bias, std::mt19937_64& rng) {
  Linear l;
  l.weight = uniform_fan_in({out, in}, in, rng);
  if (with_bias) l.bias = Tensor({out}, true);
  return l;
}

}  // namespace sgg
