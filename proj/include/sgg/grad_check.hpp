#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sgg/tensor.hpp"

namespace sgg {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error, so entries whose gradient is
  // essentially zero are compared on an absolute scale.
  double scale_floor = 1e-3;
  // 0 checks every entry; otherwise entries are visited with a fixed stride
  // so that at most this many are checked per parameter.
  std::size_t max_entries_per_param = 0;
  // When a ±step probe flips the sign of some leaky_relu input, the difference
  // straddles a kink and says nothing about the gradient. Such entries are
  // re-probed with the step divided by 10 until no sign flips (or min_step).
  bool refine_at_kinks = true;
  double min_step = 1e-9;
};

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t kink_entries = 0;  // entries that needed a smaller step
  GradCheckEntry worst;
};

struct NamedParam {
  std::string name;
  Tensor tensor;
};

// Builds a scalar loss from the current parameter values on the given tape.
using LossFn = std::function<Tensor(Tape&)>;
// Hook applied to the analytic gradients before comparison (negative controls).
using GradHook = std::function<void(std::vector<NamedParam>&)>;

// Compares reverse-mode gradients of `loss` against central differences
// (f(p+h) - f(p-h)) / 2h for every parameter entry. Failures are reported,
// never thrown. Parameter values are restored afterwards; existing gradients
// are cleared.
GradCheckReport grad_check(const LossFn& loss, std::vector<NamedParam> params,
                           const GradCheckOptions& options = {}, const GradHook& hook = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace sgg
