#include "sgg/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sgg {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

namespace {

struct Probe {
  double value = 0.0;
  std::vector<bool> pattern;  // sign of every leaky_relu input, in tape order
};

Probe probe(const LossFn& loss) {
  Tape tape;
  Probe p;
  p.value = loss(tape).item();
  for (const auto& r : tape.records()) {
    if (r.name != "leaky_relu") continue;
    for (double x : r.inputs.front().data()) p.pattern.push_back(x >= 0.0);
  }
  return p;
}

}  // namespace

GradCheckReport grad_check(const LossFn& loss, std::vector<NamedParam> params,
                           const GradCheckOptions& options, const GradHook& hook) {
  for (auto& p : params) {
    p.tensor.set_requires_grad(true);
    p.tensor.zero_grad();
  }
  {
    Tape tape;
    Tensor value = loss(tape);
    tape.backward(value);
  }
  if (hook) hook(params);
  const std::vector<bool> base = probe(loss).pattern;

  GradCheckReport report;
  for (auto& p : params) {
    auto values = p.tensor.mutable_data();
    auto grad = p.tensor.grad();
    std::size_t stride = 1;
    if (options.max_entries_per_param > 0 && values.size() > options.max_entries_per_param)
      stride = (values.size() + options.max_entries_per_param - 1) / options.max_entries_per_param;
    for (std::size_t i = 0; i < values.size(); i += stride) {
      const double saved = values[i];
      double step = options.step, numeric = 0.0;
      bool crossed = false;
      for (;;) {
        values[i] = saved + step;
        const Probe plus = probe(loss);
        values[i] = saved - step;
        const Probe minus = probe(loss);
        values[i] = saved;
        numeric = (plus.value - minus.value) / (2.0 * step);
        const bool kink = plus.pattern != base || minus.pattern != base;
        if (!kink || !options.refine_at_kinks || step / 10.0 < options.min_step) break;
        crossed = true;
        step /= 10.0;
      }
      report.kink_entries += crossed;
      double err = relative_error(grad[i], numeric, options.scale_floor);
      if (std::isnan(err)) err = INFINITY;
      if (++report.checked == 1 || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = GradCheckEntry{p.name, i, grad[i], numeric, err};
      }
    }
  }
  for (auto& p : params) p.tensor.zero_grad();
  report.passed = report.checked > 0 && report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace sgg
