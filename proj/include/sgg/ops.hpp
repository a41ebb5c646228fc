#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgg/tensor.hpp"

// Differentiable primitives. Every op records itself on the given tape;
// rank-1 tensors are treated as single rows wherever a matrix is expected.
namespace sgg {

// a[m×k] · b[k×n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// a[m×k] · b[n×k]ᵀ, the layout used for [out×in] weight matrices.
Tensor matmul_nt(Tape& tape, const Tensor& a, const Tensor& b);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& x, double factor);
// x[m×n] + bias[n] on every row.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);

// Same values under a new shape of equal size.
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);
Tensor concat(Tape& tape, const std::vector<Tensor>& xs, std::size_t axis);
Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin, std::size_t count);
// out[r] = x[index[r]]
Tensor gather_rows(Tape& tape, const Tensor& x, std::span<const std::size_t> index);
// out[segment[r]] += x[r]; out has num_segments rows.
Tensor segment_sum(Tape& tape, const Tensor& x, std::span<const std::size_t> segment,
                   std::size_t num_segments);
// out[i][j] = a[i] + b[j] for column vectors a[n×1], b[m×1] (or rank-1).
Tensor outer_sum(Tape& tape, const Tensor& a, const Tensor& b);

// slope must lie in (0,1); the derivative at exactly 0 is 1.
Tensor leaky_relu(Tape& tape, const Tensor& x, double slope);
Tensor softmax_rows(Tape& tape, const Tensor& x);
// Row softmax restricted to entries with mask != 0; masked entries are exactly 0.
// Every row needs at least one unmasked entry.
Tensor masked_softmax_rows(Tape& tape, const Tensor& x, std::span<const unsigned char> mask);

// Sum over rows of -log(max(probs[r][label[r]], 1e-12)). Rows must be
// distributions within 1e-6.
Tensor cross_entropy(Tape& tape, const Tensor& probs, std::span<const std::size_t> labels);
Tensor cross_entropy(Tape& tape, const Tensor& probs, std::size_t label);

Tensor l2_sq(Tape& tape, const Tensor& x);
Tensor sum(Tape& tape, const Tensor& x);

inline constexpr double kLogFloor = 1e-12;
inline constexpr double kDistributionTolerance = 1e-6;

}  // namespace sgg
