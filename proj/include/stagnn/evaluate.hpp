#pragma once

#include <vector>

#include "stagnn/dataset.hpp"
#include "stagnn/model.hpp"

namespace stagnn {

struct UnitPrediction {
  int unit_id = 0;
  double actual = 0.0;     // capped label from the window builder
  double predicted = 0.0;  // clamped to [0, r_max]
  double error() const { return predicted - actual; }
};

// root mean squared prediction error; throws UsageError on an empty set
double rmse(const std::vector<double>& errors);

// Asymmetric exponential penalty: early predictions (error < 0) cost
// e^{-error/13} - 1, late ones e^{error/10} - 1, summed over units. Late
// misses of equal size always cost more. Throws UsageError on an empty set.
double score(const std::vector<double>& errors);

struct EvalResult {
  std::vector<UnitPrediction> predictions;
  double rmse = 0.0;
  double score = 0.0;
};

// one inference-mode prediction per window, clamped to [0, r_max] before the
// metrics; throws UsageError when windows is empty
EvalResult evaluate_model(const Model& model, const std::vector<WindowSample>& windows,
                          double r_max);

}  // namespace stagnn
