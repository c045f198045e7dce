#include "stagnn/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "stagnn/errors.hpp"

namespace stagnn {

double rmse(const std::vector<double>& errors) {
  if (errors.empty()) throw UsageError("rmse of an empty prediction set");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

double score(const std::vector<double>& errors) {
  if (errors.empty()) throw UsageError("score of an empty prediction set");
  double total = 0.0;
  for (double e : errors) {
    total += (e < 0.0) ? std::expm1(-e / 13.0) : std::expm1(e / 10.0);
  }
  return total;
}

EvalResult evaluate_model(const Model& model, const std::vector<WindowSample>& windows,
                          double r_max) {
  if (windows.empty()) throw UsageError("evaluation needs at least one window");
  if (r_max <= 0.0) throw ParameterError("r_max must be positive");

  const ModelConfig& cfg = model.config();
  EvalResult result;
  std::vector<double> errors;
  errors.reserve(windows.size());
  for (const WindowSample& sample : windows) {
    Tensor x = Tensor::from_data({cfg.window, cfg.nodes}, sample.features);
    Tape tape;
    const double raw = model.forward(tape, x, nullptr).item();
    const double pred = std::clamp(raw, 0.0, r_max);
    result.predictions.push_back({sample.unit_id, sample.label, pred});
    errors.push_back(pred - sample.label);
  }
  result.rmse = rmse(errors);
  result.score = score(errors);
  return result;
}

}  // namespace stagnn
