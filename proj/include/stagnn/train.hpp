#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stagnn/dataset.hpp"
#include "stagnn/evaluate.hpp"
#include "stagnn/model.hpp"

namespace stagnn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are owned here, ordered like the
// parameter list the optimizer was built from.
class Adam {
 public:
  explicit Adam(const std::vector<Parameter>& params, AdamConfig cfg = {});

  // applies one update from the accumulated gradients; the caller zeroes
  // gradients afterwards
  void step(std::vector<Parameter>& params);
  std::int64_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t t_ = 0;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 100;
  AdamConfig adam;
  std::uint64_t seed = 1;  // drives shuffle order and dropout draws
  int trial = 0;           // labels divergence diagnostics only
};

struct EpochRecord {
  int epoch = 0;   // 1-based
  double loss = 0.0;  // mean over the epoch's batch MSE values
};

// One trial of shuffled mini-batch training, updating the model in place.
// Epoch e shuffles with seed_mix(seed, e); batch b draws dropout from
// seed_mix(seed, e, b). The last partial batch is kept. A non-finite batch
// loss aborts with DivergenceError.
std::vector<EpochRecord> train_model(Model& model, const std::vector<WindowSample>& samples,
                                     const TrainConfig& cfg);

struct TrialResult {
  int trial = 0;
  std::vector<EpochRecord> epochs;
  double rmse = 0.0;
  double score = 0.0;
  double seconds = 0.0;  // wall clock, reported only in logs
};

struct TrainReport {
  std::vector<TrialResult> trials;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;  // population standard deviation
  double score_mean = 0.0;
  double score_std = 0.0;
};

// Trial t reseeds everything (parameter init, shuffling, dropout) with
// base_seed + t, trains a fresh model and evaluates it on the test windows.
// When keep_first is non-null the trial-0 model is stored there for
// checkpointing. Trials are independent, so running them in parallel
// changes wall clock only, never the numbers.
TrainReport run_trials(const ModelConfig& model_cfg, const TrainConfig& train_cfg, int trials,
                       std::uint64_t base_seed, const std::vector<double>& propagation,
                       const std::vector<WindowSample>& train_windows,
                       const std::vector<WindowSample>& test_windows, double r_max,
                       std::optional<Model>* keep_first = nullptr, bool parallel = false);

}  // namespace stagnn
