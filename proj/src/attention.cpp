#include "sgg/attention.hpp"

#include "sgg/error.hpp"
#include "sgg/layers.hpp"
#include "sgg/ops.hpp"

namespace sgg {

AttentionHead make_attention_head(std::size_t in_dim, std::size_t out_dim, std::mt19937_64& rng) {
  AttentionHead h;
  h.u = uniform_fan_in({out_dim, in_dim}, in_dim, rng);
  h.lambda = uniform_fan_in({2 * out_dim}, 2 * out_dim, rng);
  return h;
}

namespace {

void check_head(const AttentionHead& head, const Tensor& features, std::size_t mask_size) {
  const std::size_t n = features.rows();
  if (features.cols() != head.in_dim())
    throw SizeMismatch("features of width " + std::to_string(features.cols()) +
                       " for a head expecting " + std::to_string(head.in_dim()));
  if (head.lambda.size() != 2 * head.out_dim())
    throw SizeMismatch("attention vector must have 2·M' entries");
  if (mask_size != n * n)
    throw SizeMismatch("adjacency of " + std::to_string(mask_size) + " entries for " +
                       std::to_string(n) + " nodes");
}

// Coefficients from already transformed node features H = F·Uᵀ.
Tensor coefficients_from(Tape& tape, const AttentionHead& head, const Tensor& transformed,
                         std::span<const unsigned char> mask, double slope) {
  const std::size_t m = head.out_dim();
  Tensor left = slice_cols(tape, head.lambda, 0, m);
  Tensor right = slice_cols(tape, head.lambda, m, m);
  Tensor source = matmul_nt(tape, transformed, left);   // n×1: Λ_lᵀ U f_i
  Tensor target = matmul_nt(tape, transformed, right);  // n×1: Λ_rᵀ U f_j
  Tensor scores = leaky_relu(tape, outer_sum(tape, source, target), slope);
  return masked_softmax_rows(tape, scores, mask);
}

}  // namespace

Tensor attention_coefficients(Tape& tape, const AttentionHead& head, const Tensor& features,
                              std::span<const unsigned char> mask, double slope) {
  check_head(head, features, mask.size());
  return coefficients_from(tape, head, matmul_nt(tape, features, head.u), mask, slope);
}

GatOutput gat_layer(Tape& tape, std::span<const AttentionHead> heads, const Tensor& features,
                    std::span<const unsigned char> mask, double attention_slope,
                    double output_slope) {
  if (heads.empty()) throw EmptyInput("gat_layer needs at least one head");
  GatOutput out;
  std::vector<Tensor> parts;
  for (const auto& head : heads) {
    check_head(head, features, mask.size());
    if (head.out_dim() != heads.front().out_dim())
      throw SizeMismatch("attention heads must share their output width");
    Tensor transformed = matmul_nt(tape, features, head.u);
    Tensor alpha = coefficients_from(tape, head, transformed, mask, attention_slope);
    parts.push_back(leaky_relu(tape, matmul(tape, alpha, transformed), output_slope));
    out.alphas.push_back(alpha);
  }
  out.output = parts.size() == 1 ? parts.front() : concat(tape, parts, 1);
  return out;
}

}  // namespace sgg
