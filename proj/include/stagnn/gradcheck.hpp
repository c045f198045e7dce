#pragma once

#include <functional>
#include <vector>

#include "stagnn/tensor.hpp"

namespace stagnn {

// Central-difference gradient verification. The callable must evaluate a
// scalar from the given leaves; it is re-run with perturbed leaf data, so it
// has to read the leaves fresh on every call.
using TapedFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::int64_t coords_checked = 0;
};

// Runs one taped backward pass for the analytic gradients, then perturbs
// every input coordinate by +/- step. Relative error per coordinate is
// |analytic - numeric| / max(1, |analytic|).
GradCheckReport gradient_check(const TapedFn& f, const std::vector<Tensor>& inputs,
                               double step = 1e-5);

}  // namespace stagnn
