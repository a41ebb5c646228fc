#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "sgg/tensor.hpp"

namespace sgg {

// One graph self-attention head: linear map U [M'×M] and attention weight
// vector Λ of length 2M' scoring [U·f_i ‖ U·f_j].
struct AttentionHead {
  Tensor u;
  Tensor lambda;

  std::size_t in_dim() const { return u.cols(); }
  std::size_t out_dim() const { return u.rows(); }
};

AttentionHead make_attention_head(std::size_t in_dim, std::size_t out_dim, std::mt19937_64& rng);

// α[i][j] = softmax over neighbors j of LeakyReLU(Λᵀ[U·f_i ‖ U·f_j]); exactly 0
// off the neighbor mask. `mask` is n×n, row i listing the neighbors of i.
Tensor attention_coefficients(Tape& tape, const AttentionHead& head, const Tensor& features,
                              std::span<const unsigned char> mask, double slope = 0.2);

struct GatOutput {
  Tensor output;               // n × (K·M')
  std::vector<Tensor> alphas;  // one n×n coefficient matrix per head
};

// Φ(f_i) = ‖_k σ(Σ_{j∈N_i} α^k_ij U^k f_j), σ = LeakyReLU(output_slope).
GatOutput gat_layer(Tape& tape, std::span<const AttentionHead> heads, const Tensor& features,
                    std::span<const unsigned char> mask, double attention_slope = 0.2,
                    double output_slope = 0.2);

}  // namespace sgg
