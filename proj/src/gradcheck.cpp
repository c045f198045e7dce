#include "stagnn/gradcheck.hpp"

#include <cmath>

namespace stagnn {

GradCheckReport gradient_check(const TapedFn& f, const std::vector<Tensor>& inputs, double step) {
  if (step <= 0.0) throw ParameterError("gradient_check step must be positive");

  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& in : inputs) {
    leaves.push_back(Tensor::from_data(in.shape(), in.data_vec(), true));
  }

  Tape tape;
  Tensor out = f(tape, leaves);
  if (out.numel() != 1) {
    throw UsageError("gradient_check requires a scalar valued function");
  }
  tape.backward(out);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (const Tensor& leaf : leaves) analytic.push_back(leaf.grad());

  auto eval = [&]() {
    Tape t;
    return f(t, leaves).item();
  };

  GradCheckReport report;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    double* data = leaves[li].mutable_data();
    const std::size_t n = static_cast<std::size_t>(leaves[li].numel());
    for (std::size_t i = 0; i < n; ++i) {
      const double saved = data[i];
      data[i] = saved + step;
      const double up = eval();
      data[i] = saved - step;
      const double down = eval();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[li][i];
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      report.max_rel_error = std::max(report.max_rel_error, rel);
      ++report.coords_checked;
    }
  }
  return report;
}

}  // namespace stagnn
