#pragma once

#include <cstddef>
#include <random>

#include "sgg/tensor.hpp"

namespace sgg {

// Affine map y = x·Wᵀ + b with W stored [out×in]. `bias` is undefined for
// bias-free maps.
struct Linear {
  Tensor weight;
  Tensor bias;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  Tensor operator()(Tape& tape, const Tensor& x) const;
};

// Uniform(-1/sqrt(in), 1/sqrt(in)) weights, zero bias.
Linear make_linear(std::size_t in, std::size_t out, bool with_bias, std::mt19937_64& rng);
Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng);

}  // namespace sgg
