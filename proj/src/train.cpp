#include "stagnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <utility>

#include "stagnn/errors.hpp"
#include "stagnn/kernels.hpp"
#include "stagnn/ops.hpp"
#include "stagnn/rng.hpp"

namespace stagnn {

Adam::Adam(const std::vector<Parameter>& params, AdamConfig cfg) : cfg_(cfg) {
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("adam betas must be in [0, 1)");
  }
  if (!(cfg.eps > 0.0)) throw ConfigError("adam eps must be positive");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Parameter& p : params) {
    m_.emplace_back(static_cast<std::size_t>(p.value.numel()), 0.0);
    v_.emplace_back(static_cast<std::size_t>(p.value.numel()), 0.0);
  }
}

void Adam::step(std::vector<Parameter>& params) {
  if (params.size() != m_.size()) {
    throw UsageError("optimizer was built for a different parameter list");
  }
  ++t_;
  const double bc1 = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
  const double bc2 = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
  const kernels::KernelTable& k = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i].value;
    const std::vector<double>& g = p.grad();
    if (g.size() != m_[i].size()) {
      throw UsageError("parameter '" + params[i].name + "' changed size under the optimizer");
    }
    k.adam_update(p.mutable_data(), m_[i].data(), v_[i].data(), g.data(), g.size(), cfg_.lr,
                  cfg_.beta1, cfg_.beta2, cfg_.eps, bc1, bc2);
  }
}

std::vector<EpochRecord> train_model(Model& model, const std::vector<WindowSample>& samples,
                                     const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (samples.empty()) throw ConfigError("no training windows");

  const ModelConfig& mc = model.config();
  Adam opt(model.parameters(), cfg.adam);
  std::vector<EpochRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto shuffle_rng = make_rng(seed_mix(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const int batch = batches + 1;
      auto dropout_rng = make_rng(seed_mix(cfg.seed, static_cast<std::uint64_t>(epoch),
                                           static_cast<std::uint64_t>(batch)));

      Tape tape;
      Tensor total;
      for (std::size_t s = start; s < end; ++s) {
        const WindowSample& sample = samples[order[s]];
        Tensor x = Tensor::from_data({mc.window, mc.nodes}, sample.features);
        Tensor err = sub(tape, model.forward(tape, x, &dropout_rng),
                         Tensor::from_data({1, 1}, {sample.label}));
        Tensor sq = mul(tape, err, err);
        total = total.defined() ? add(tape, total, sq) : sq;
      }
      Tensor loss = mul_scalar(tape, total, 1.0 / static_cast<double>(end - start));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw DivergenceError("training loss is not finite (trial " +
                                  std::to_string(cfg.trial) + ", epoch " +
                                  std::to_string(epoch) + ", batch " + std::to_string(batch) +
                                  ")",
                              cfg.trial, epoch, batch);
      }
      tape.backward(loss);
      opt.step(model.parameters());
      for (Parameter& p : model.parameters()) p.value.zero_grad();

      loss_sum += value;
      ++batches;
    }
    records.push_back({epoch, loss_sum / static_cast<double>(batches)});
  }
  return records;
}

TrainReport run_trials(const ModelConfig& model_cfg, const TrainConfig& train_cfg, int trials,
                       std::uint64_t base_seed, const std::vector<double>& propagation,
                       const std::vector<WindowSample>& train_windows,
                       const std::vector<WindowSample>& test_windows, double r_max,
                       std::optional<Model>* keep_first, bool parallel) {
  if (trials < 1) throw ConfigError("trials must be at least 1");

  auto run_one = [&](int t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    ModelConfig mc = model_cfg;
    mc.seed = seed;
    TrainConfig tc = train_cfg;
    tc.seed = seed;
    tc.trial = t;

    Model model(mc, propagation);
    const auto started = std::chrono::steady_clock::now();
    TrialResult trial;
    trial.trial = t;
    trial.epochs = train_model(model, train_windows, tc);
    trial.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                        .count();
    EvalResult eval = evaluate_model(model, test_windows, r_max);
    trial.rmse = eval.rmse;
    trial.score = eval.score;
    return std::pair<TrialResult, Model>(std::move(trial), std::move(model));
  };

  TrainReport report;
  if (parallel && trials > 1) {
    std::vector<std::future<std::pair<TrialResult, Model>>> futures;
    futures.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      futures.push_back(std::async(std::launch::async, run_one, t));
    }
    for (int t = 0; t < trials; ++t) {
      auto [trial, model] = futures[static_cast<std::size_t>(t)].get();
      report.trials.push_back(std::move(trial));
      if (t == 0 && keep_first) keep_first->emplace(std::move(model));
    }
  } else {
    for (int t = 0; t < trials; ++t) {
      auto [trial, model] = run_one(t);
      report.trials.push_back(std::move(trial));
      if (t == 0 && keep_first) keep_first->emplace(std::move(model));
    }
  }

  const double n = static_cast<double>(trials);
  double rmse_sum = 0.0;
  double score_sum = 0.0;
  for (const TrialResult& t : report.trials) {
    rmse_sum += t.rmse;
    score_sum += t.score;
  }
  report.rmse_mean = rmse_sum / n;
  report.score_mean = score_sum / n;
  double rmse_var = 0.0;
  double score_var = 0.0;
  for (const TrialResult& t : report.trials) {
    rmse_var += (t.rmse - report.rmse_mean) * (t.rmse - report.rmse_mean);
    score_var += (t.score - report.score_mean) * (t.score - report.score_mean);
  }
  report.rmse_std = std::sqrt(rmse_var / n);
  report.score_std = std::sqrt(score_var / n);
  return report;
}

}  // namespace stagnn
