#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stagnn/graph.hpp"
#include "stagnn/model.hpp"
#include "stagnn/normalization.hpp"
#include "stagnn/train.hpp"

namespace stagnn {

// One experiment description. Loaded from a json file whose keys match the
// field names below; the command line exposes the same keys as flags (with
// dashes instead of underscores) that override the file.
struct RunConfig {
  // data location: <data_dir>/train_<dataset>.txt, test_<dataset>.txt,
  // RUL_<dataset>.txt; artifacts land in out_dir
  std::string data_dir = "data";
  std::string dataset = "FD001";
  std::string out_dir = "out";

  // windowing and the piecewise linear label cap
  int window = 50;
  int stride = 1;
  double r_max = 125.0;

  // normalization
  std::string norm = "clustered";  // unified | clustered
  int clusters = 6;
  std::uint64_t kmeans_seed = 1;

  // sensor graph
  double lambda = 0.5;
  std::string edge_measure = "correlation";  // correlation | covariance

  // model
  std::string variant = "stagnn";
  int gcn_hidden = 64;
  int heads_spatial = 2;
  int heads_temporal = 2;
  int kernel_size = 2;
  int tcn_channels1 = 64;
  int tcn_channels2 = 10;
  double leaky_slope = 0.2;
  double dropout = 0.5;

  // training
  int epochs = 100;
  int batch_size = 100;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int trials = 10;
  std::uint64_t seed = 1;  // trial t runs with seed + t

  // execution
  std::string backend = "auto";  // kernel backend: auto | scalar | avx2
  bool deterministic = true;     // forces sequential trials
  bool parallel_trials = false;
  // diagnostic: keep attention parameters registered but skip the blocks
  bool identity_attention = false;
};

// Rejects unknown keys and ill-typed values with a ConfigError; values are
// otherwise range-checked by validate_run_config.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& file);
std::string run_config_to_json(const RunConfig& cfg);

// throws ConfigError on out-of-range values or unknown enum names
void validate_run_config(const RunConfig& cfg);

NormMode norm_mode(const RunConfig& cfg);
EdgeMeasure parse_edge_measure(const std::string& name);
std::string edge_measure_name(EdgeMeasure m);

ModelConfig make_model_config(const RunConfig& cfg);
TrainConfig make_train_config(const RunConfig& cfg);

std::filesystem::path train_file(const RunConfig& cfg);
std::filesystem::path test_file(const RunConfig& cfg);
std::filesystem::path rul_file(const RunConfig& cfg);

}  // namespace stagnn
