#include "sgg/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "sgg/error.hpp"

namespace sgg {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap view(std::span<const double> s, std::size_t r, std::size_t c) {
  return ConstMatMap(s.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
MatMap view(std::span<double> s, std::size_t r, std::size_t c) {
  return MatMap(s.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

Shape matrix_shape(std::size_t r, std::size_t c) { return {r, c}; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeMismatch(std::string(op) + ": " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw ShapeMismatch("matmul: " + shape_string(a.shape()) + " · " + shape_string(b.shape()));
  Tensor out(matrix_shape(m, n));
  view(out.mutable_data(), m, n).noalias() = view(a.data(), m, k) * view(b.data(), k, n);
  return tape.record("matmul", {a, b}, out, [a, b, out, m, k, n] {
    auto g = view(std::span<const double>(out.grad()), m, n);
    if (a.requires_grad())
      view(a.grad(), m, k).noalias() += g * view(b.data(), k, n).transpose();
    if (b.requires_grad())
      view(b.grad(), k, n).noalias() += view(a.data(), m, k).transpose() * g;
  });
}

Tensor matmul_nt(Tape& tape, const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k)
    throw ShapeMismatch("matmul_nt: " + shape_string(a.shape()) + " · " +
                        shape_string(b.shape()) + "ᵀ");
  Tensor out(matrix_shape(m, n));
  view(out.mutable_data(), m, n).noalias() =
      view(a.data(), m, k) * view(b.data(), n, k).transpose();
  return tape.record("matmul_nt", {a, b}, out, [a, b, out, m, k, n] {
    auto g = view(std::span<const double>(out.grad()), m, n);
    if (a.requires_grad()) view(a.grad(), m, k).noalias() += g * view(b.data(), n, k);
    if (b.requires_grad())
      view(b.grad(), n, k).noalias() += g.transpose() * view(a.data(), m, k);
  });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i];
  return tape.record("add", {a, b}, out, [a, b, out] {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] - b[i];
  return tape.record("sub", {a, b}, out, [a, b, out] {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] * b[i];
  return tape.record("mul", {a, b}, out, [a, b, out] {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
    }
    if (b.requires_grad()) {
      auto gb = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
    }
  });
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  Tensor out(x.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * factor;
  return tape.record("scale", {x}, out, [x, out, factor] {
    auto g = out.grad();
    auto gx = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  const std::size_t m = x.rows(), n = x.cols();
  if (bias.size() != n)
    throw ShapeMismatch("add_bias: bias of " + std::to_string(bias.size()) +
                        " entries for " + std::to_string(n) + " columns");
  Tensor out(x.shape());
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) o[r * n + c] = x[r * n + c] + bias[c];
  return tape.record("add_bias", {x, bias}, out, [x, bias, out, m, n] {
    auto g = out.grad();
    if (x.requires_grad()) {
      auto gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (bias.requires_grad()) {
      auto gb = bias.grad();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
    }
  });
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size())
    throw ShapeMismatch("reshape " + shape_string(x.shape()) + " to " + shape_string(shape));
  Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  return tape.record("reshape", {x}, out, [x, out] {
    auto g = out.grad();
    auto gx = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Tensor concat(Tape& tape, const std::vector<Tensor>& xs, std::size_t axis) {
  if (xs.empty()) throw EmptyInput("concat of an empty list");
  const Shape& first = xs.front().shape();
  if (axis >= first.size())
    throw ShapeMismatch("concat axis " + std::to_string(axis) + " out of range for " +
                        shape_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& t : xs) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d)
      if (d != axis && s[d] != first[d]) ok = false;
    if (!ok)
      throw ShapeMismatch("concat: " + shape_string(s) + " incompatible with " +
                          shape_string(first) + " along axis " + std::to_string(axis));
    out_shape[axis] += s[axis];
  }
  // outer = product of dims before axis, inner = product after.
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_stride = out_shape[axis] * inner;

  Tensor out(out_shape);
  auto o = out.mutable_data();
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& t : xs) {
    offsets.push_back(offset);
    const std::size_t chunk = t.shape()[axis] * inner;
    auto src = t.data();
    for (std::size_t p = 0; p < outer; ++p)
      std::copy_n(src.begin() + p * chunk, chunk, o.begin() + p * out_stride + offset);
    offset += chunk;
  }
  return tape.record("concat", xs, out, [xs, out, offsets, outer, inner, out_stride, axis] {
    auto g = out.grad();
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!xs[k].requires_grad()) continue;
      const std::size_t chunk = xs[k].shape()[axis] * inner;
      auto gx = xs[k].grad();
      for (std::size_t p = 0; p < outer; ++p)
        for (std::size_t i = 0; i < chunk; ++i)
          gx[p * chunk + i] += g[p * out_stride + offsets[k] + i];
    }
  });
}

Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin, std::size_t count) {
  const std::size_t m = x.rows(), n = x.cols();
  if (count == 0 || begin + count > n)
    throw ShapeMismatch("slice_cols [" + std::to_string(begin) + ", " +
                        std::to_string(begin + count) + ") of " + std::to_string(n) + " columns");
  Tensor out(matrix_shape(m, count));
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < m; ++r)
    std::copy_n(x.data().begin() + r * n + begin, count, o.begin() + r * count);
  return tape.record("slice_cols", {x}, out, [x, out, m, n, begin, count] {
    auto g = out.grad();
    auto gx = x.grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < count; ++c) gx[r * n + begin + c] += g[r * count + c];
  });
}

Tensor gather_rows(Tape& tape, const Tensor& x, std::span<const std::size_t> index) {
  const std::size_t m = x.rows(), n = x.cols();
  if (index.empty()) throw EmptyInput("gather_rows with no indices");
  for (auto i : index)
    if (i >= m)
      throw IndexOutOfRange("gather_rows index " + std::to_string(i) + " of " +
                            std::to_string(m) + " rows");
  std::vector<std::size_t> idx(index.begin(), index.end());
  Tensor out(matrix_shape(idx.size(), n));
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy_n(x.data().begin() + idx[r] * n, n, o.begin() + r * n);
  return tape.record("gather_rows", {x}, out, [x, out, idx = std::move(idx), n] {
    auto g = out.grad();
    auto gx = x.grad();
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < n; ++c) gx[idx[r] * n + c] += g[r * n + c];
  });
}

Tensor segment_sum(Tape& tape, const Tensor& x, std::span<const std::size_t> segment,
                   std::size_t num_segments) {
  const std::size_t m = x.rows(), n = x.cols();
  if (segment.size() != m)
    throw SizeMismatch("segment_sum: " + std::to_string(segment.size()) + " segment ids for " +
                       std::to_string(m) + " rows");
  if (num_segments == 0) throw EmptyInput("segment_sum into zero segments");
  for (auto s : segment)
    if (s >= num_segments)
      throw IndexOutOfRange("segment id " + std::to_string(s) + " of " +
                            std::to_string(num_segments));
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  Tensor out(matrix_shape(num_segments, n));
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) o[seg[r] * n + c] += x[r * n + c];
  return tape.record("segment_sum", {x}, out, [x, out, seg = std::move(seg), n] {
    auto g = out.grad();
    auto gx = x.grad();
    for (std::size_t r = 0; r < seg.size(); ++r)
      for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += g[seg[r] * n + c];
  });
}

Tensor outer_sum(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.size() != a.rows() * a.cols() || (a.cols() != 1 && a.rows() != 1) ||
      (b.cols() != 1 && b.rows() != 1))
    throw ShapeMismatch("outer_sum expects vectors, got " + shape_string(a.shape()) + " and " +
                        shape_string(b.shape()));
  const std::size_t n = a.size(), m = b.size();
  Tensor out(matrix_shape(n, m));
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) o[i * m + j] = a[i] + b[j];
  return tape.record("outer_sum", {a, b}, out, [a, b, out, n, m] {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ga = a.grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) ga[i] += g[i * m + j];
    }
    if (b.requires_grad()) {
      auto gb = b.grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) gb[j] += g[i * m + j];
    }
  });
}

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0))
    throw InvalidSlope("leaky_relu slope must lie in (0,1), got " + std::to_string(slope));
  Tensor out(x.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
  return tape.record("leaky_relu", {x}, out, [x, out, slope] {
    auto g = out.grad();
    auto gx = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += x[i] >= 0.0 ? g[i] : slope * g[i];
  });
}

namespace {

// Shared backward for (masked) row softmax: dx = y ⊙ (g - <g, y>).
void softmax_backward(const Tensor& x, const Tensor& y, std::size_t m, std::size_t n) {
  auto g = y.grad();
  auto gx = x.grad();
  auto v = y.data();
  for (std::size_t r = 0; r < m; ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < n; ++c) dot += g[r * n + c] * v[r * n + c];
    for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += v[r * n + c] * (g[r * n + c] - dot);
  }
}

}  // namespace

Tensor softmax_rows(Tape& tape, const Tensor& x) {
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out(x.shape());
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = x.data().data() + r * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c) z += (o[r * n + c] = std::exp(row[c] - mx));
    for (std::size_t c = 0; c < n; ++c) o[r * n + c] /= z;
  }
  return tape.record("softmax_rows", {x}, out, [x, out, m, n] { softmax_backward(x, out, m, n); });
}

Tensor masked_softmax_rows(Tape& tape, const Tensor& x, std::span<const unsigned char> mask) {
  const std::size_t m = x.rows(), n = x.cols();
  if (mask.size() != m * n)
    throw SizeMismatch("mask of " + std::to_string(mask.size()) + " entries for " +
                       shape_string(x.shape()));
  Tensor out(x.shape());
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < m; ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < n; ++c)
      if (mask[r * n + c]) mx = std::max(mx, x[r * n + c]);
    if (mx == -INFINITY) throw EmptyInput("masked softmax row " + std::to_string(r) + " is empty");
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c)
      if (mask[r * n + c]) z += (o[r * n + c] = std::exp(x[r * n + c] - mx));
    for (std::size_t c = 0; c < n; ++c) o[r * n + c] /= z;
  }
  // Masked outputs are constant zeros, so the unmasked formula already gives
  // them zero gradient.
  return tape.record("masked_softmax_rows", {x}, out,
                     [x, out, m, n] { softmax_backward(x, out, m, n); });
}

Tensor cross_entropy(Tape& tape, const Tensor& probs, std::span<const std::size_t> labels) {
  const std::size_t m = probs.rows(), n = probs.cols();
  if (labels.size() != m)
    throw SizeMismatch("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                       std::to_string(m) + " rows");
  double total = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (labels[r] >= n)
      throw IndexOutOfRange("class " + std::to_string(labels[r]) + " of " + std::to_string(n));
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += probs[r * n + c];
    if (std::abs(s - 1.0) > kDistributionTolerance)
      throw NotADistribution("row " + std::to_string(r) + " sums to " + std::to_string(s));
    total -= std::log(std::max(probs[r * n + labels[r]], kLogFloor));
  }
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  Tensor out = Tensor::scalar(total);
  return tape.record("cross_entropy", {probs}, out, [probs, out, lab = std::move(lab), n] {
    const double g = out.grad()[0];
    auto gp = probs.grad();
    for (std::size_t r = 0; r < lab.size(); ++r) {
      const double p = probs[r * n + lab[r]];
      if (p > kLogFloor) gp[r * n + lab[r]] -= g / p;
    }
  });
}

Tensor cross_entropy(Tape& tape, const Tensor& probs, std::size_t label) {
  if (probs.rows() != 1)
    throw ShapeMismatch("single-label cross_entropy expects one distribution, got " +
                        shape_string(probs.shape()));
  const std::size_t labels[1] = {label};
  return cross_entropy(tape, probs, std::span<const std::size_t>(labels, 1));
}

Tensor l2_sq(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v * v;
  Tensor out = Tensor::scalar(total);
  return tape.record("l2_sq", {x}, out, [x, out] {
    const double g = out.grad()[0];
    auto gx = x.grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * g * x[i];
  });
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor out = Tensor::scalar(total);
  return tape.record("sum", {x}, out, [x, out] {
    const double g = out.grad()[0];
    auto gx = x.grad();
    for (auto& v : gx) v += g;
  });
}

}  // namespace sgg
