#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sgg/config.hpp"
#include "sgg/dataset.hpp"
#include "sgg/synthetic.hpp"
#include "sgg/tensor.hpp"

namespace sgg::test {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_size(shape));
  for (auto& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

// Rows are softmax distributions of random logits.
inline Tensor random_distribution(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += (v[r * cols + c] = std::exp(n(rng)));
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] /= z;
  }
  return Tensor({rows, cols}, std::move(v));
}

inline ModelConfig tiny_model(std::size_t feature_dim = 32) {
  ModelConfig c;
  c.feature_dim = feature_dim;
  c.embed_dim = 6;
  c.embed_hidden = 5;
  c.embed_layers = 2;
  c.visual_dim = 8;
  c.relation_dim = 4;
  c.heads = 2;
  c.graph_width = 6;
  c.head_hidden = 7;
  return c;
}

inline SyntheticConfig tiny_synthetic(std::size_t images = 4, std::size_t entities = 3,
                                      std::uint64_t seed = 7) {
  SyntheticConfig c;
  c.n_images = images;
  c.entities_per_image = entities;
  c.feature_dim = 32;
  c.seed = seed;
  return c;
}

inline Box random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  if (a > b) std::swap(a, b);
  if (c > d) std::swap(c, d);
  if (b - a < 1e-3) b = std::min(1.0, a + 1e-3), a = b - 1e-3;
  if (d - c < 1e-3) d = std::min(1.0, c + 1e-3), c = d - 1e-3;
  return {a, c, b, d};
}

}  // namespace sgg::test
