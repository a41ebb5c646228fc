#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgg {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient is written
  bool requires_grad = false;
};
}  // namespace detail

// Dense row-major double tensor. Tensor is a shared handle: copies alias the
// same storage, which is what lets the tape route gradients back to leaves.
// Scalars have shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->value.size(); }
  // 2-D view; a rank-1 tensor reads as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return impl_->value; }
  std::span<double> mutable_data() { return impl_->value; }
  double operator[](std::size_t i) const { return impl_->value[i]; }
  double at(std::size_t r, std::size_t c) const { return impl_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on) { impl_->requires_grad = on; }

  bool has_grad() const { return !impl_->grad.empty(); }
  // Gradient buffer, allocated as zeros on first access.
  std::span<double> grad() const;
  void zero_grad() const;

  // Fresh storage with the same values and no gradient history.
  Tensor detach() const;
  bool is(const Tensor& other) const noexcept { return impl_ == other.impl_; }

 private:
  std::shared_ptr<detail::TensorData> impl_;
};

// Ordered record of executed primitive ops. A tape is single-use: backward()
// replays the records in exact reverse order once, then the tape is consumed
// until reset().
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Record {
    std::string_view name;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;  // null when no input requires a gradient
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers an executed op. The output requires a gradient iff any input
  // does; the backward closure is dropped otherwise.
  Tensor record(std::string_view name, std::vector<Tensor> inputs, Tensor output,
                BackwardFn backward);

  void backward(const Tensor& loss);
  void reset();

  std::size_t size() const noexcept { return records_.size(); }
  bool consumed() const noexcept { return consumed_; }
  const std::vector<Record>& records() const noexcept { return records_; }
  // Record indices in the order the last backward() visited them.
  const std::vector<std::size_t>& last_backward_order() const noexcept { return visit_order_; }

 private:
  std::vector<Record> records_;
  std::vector<std::size_t> visit_order_;
  bool consumed_ = false;
};

}  // namespace sgg
