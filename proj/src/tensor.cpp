#include "sgg/tensor.hpp"

#include <algorithm>
#include <numeric>

#include "sgg/error.hpp"

namespace sgg {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {
void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeMismatch("tensor shape must have at least one dimension");
  for (auto d : shape)
    if (d == 0) throw ShapeMismatch("tensor dimensions must be positive: " + shape_string(shape));
}
}  // namespace

Tensor::Tensor(Shape shape, bool requires_grad)
    : impl_(std::make_shared<detail::TensorData>()) {
  check_shape(shape);
  impl_->value.assign(shape_size(shape), 0.0);
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : impl_(std::make_shared<detail::TensorData>()) {
  check_shape(shape);
  if (shape_size(shape) != values.size())
    throw ShapeMismatch("shape " + shape_string(shape) + " does not hold " +
                        std::to_string(values.size()) + " values");
  impl_->shape = std::move(shape);
  impl_->value = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v, bool requires_grad) { return Tensor({1}, {v}, requires_grad); }

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeMismatch("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const {
  const auto& s = impl_->shape;
  if (s.size() == 1) return 1;
  if (s.size() == 2) return s[0];
  throw ShapeMismatch("expected a rank-1 or rank-2 tensor, got " + shape_string(s));
}

std::size_t Tensor::cols() const {
  const auto& s = impl_->shape;
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return s[1];
  throw ShapeMismatch("expected a rank-1 or rank-2 tensor, got " + shape_string(s));
}

double Tensor::item() const {
  if (size() != 1) throw NonScalarLoss("item() on tensor of shape " + shape_string(shape()));
  return impl_->value[0];
}

std::span<double> Tensor::grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->value.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() const {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->value, false); }

Tensor Tape::record(std::string_view name, std::vector<Tensor> inputs, Tensor output,
                    BackwardFn backward) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.requires_grad(); });
  output.set_requires_grad(needs);
  records_.push_back(Record{name, std::move(inputs), output, needs ? std::move(backward) : nullptr});
  return output;
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw TapeConsumed("backward() called twice on the same tape without reset()");
  if (loss.size() != 1)
    throw NonScalarLoss("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  consumed_ = true;
  visit_order_.clear();
  if (!loss.requires_grad()) return;
  loss.grad()[0] += 1.0;
  for (std::size_t k = records_.size(); k-- > 0;) {
    visit_order_.push_back(k);
    auto& rec = records_[k];
    if (rec.backward && rec.output.has_grad()) rec.backward();
  }
}

void Tape::reset() {
  records_.clear();
  visit_order_.clear();
  consumed_ = false;
}

}  // namespace sgg
