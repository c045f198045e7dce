#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stagnn/config.hpp"
#include "stagnn/graph.hpp"
#include "stagnn/model.hpp"
#include "stagnn/normalization.hpp"

namespace stagnn {

// Artifact locations inside a run's output directory. Every file except
// run.log is byte-identical across reruns of the same configuration;
// timestamps only ever appear in run.log.
struct OutPaths {
  explicit OutPaths(std::filesystem::path d) : dir(std::move(d)) {}
  std::filesystem::path dir;

  std::filesystem::path prep_manifest() const { return dir / "prep_manifest.json"; }
  std::filesystem::path norm_stats() const { return dir / "norm_stats.json"; }
  std::filesystem::path adjacency() const { return dir / "adjacency.csv"; }
  std::filesystem::path propagation() const { return dir / "propagation.csv"; }
  std::filesystem::path prep_summary() const { return dir / "prep_summary.csv"; }
  std::filesystem::path train_report() const { return dir / "train_report.csv"; }
  std::filesystem::path checkpoint() const { return dir / "checkpoint.json"; }
  std::filesystem::path metrics() const { return dir / "metrics.csv"; }
  std::filesystem::path predictions() const { return dir / "predictions.csv"; }
  std::filesystem::path ablation() const { return dir / "ablation.csv"; }
  std::filesystem::path export_file() const { return dir / "export.json"; }
  std::filesystem::path run_log() const { return dir / "run.log"; }
};

// Everything needed to rebuild the first trial's model and its preprocessing
// exactly: the model configuration and parameters, the fitted normalization
// stats and the sensor graph the checkpoint was trained with.
struct Checkpoint {
  std::string dataset;
  int stride = 1;
  double r_max = 125.0;
  double lambda = 0.5;
  EdgeMeasure measure = EdgeMeasure::kCorrelation;
  NormStats norm;
  std::vector<double> adjacency;
  std::vector<double> propagation;
  ModelConfig model;
};

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& cp, const Model& model);

// Rebuilds the model from the stored configuration and tensors. Throws
// ConfigError when the file is missing and ArtifactError when its contents
// do not fit together (unknown fields, shape mismatches, bad enum names).
std::pair<Checkpoint, Model> load_checkpoint(const std::filesystem::path& file);

// Fits normalization on the training split, builds the sensor graph from the
// normalized training trajectories and writes norm stats, adjacency,
// propagation, a window-count summary and a manifest of the settings used.
void cmd_prep(const RunConfig& cfg);

// Runs config.trials independent trials on the prep artifacts, writes the
// per-epoch/per-trial report plus aggregates and checkpoints the first
// trial's model. Requires cmd_prep output for the same settings.
void cmd_train(const RunConfig& cfg);

// Loads the checkpoint, rebuilds the test windows with its stored
// preprocessing and writes per-unit predictions and the two metrics.
void cmd_eval(const RunConfig& cfg);

// Trains all six ablation variants with shared seeds and writes one
// comparison table.
void cmd_ablation(const RunConfig& cfg);

// Exports attention weights, the pre-head feature vector and the prediction
// for one test unit's window. window_index 0 selects the benchmark (final)
// window; m >= 1 selects the m-th stride window of that unit's history.
void cmd_export(const RunConfig& cfg, int unit, int window_index = 0);

}  // namespace stagnn
