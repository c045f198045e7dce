#include "stagnn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stagnn/dataset.hpp"
#include "stagnn/errors.hpp"
#include "stagnn/kernels.hpp"

namespace stagnn {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "data_dir",      "dataset",       "out_dir",       "window",
      "stride",        "r_max",         "norm",          "clusters",
      "kmeans_seed",   "lambda",        "edge_measure",  "variant",
      "gcn_hidden",    "heads_spatial", "heads_temporal", "kernel_size",
      "tcn_channels1", "tcn_channels2", "leaky_slope",   "dropout",
      "epochs",        "batch_size",    "lr",            "beta1",
      "beta2",         "eps",           "trials",        "seed",
      "backend",       "deterministic", "parallel_trials",
      "identity_attention",
  };
  return keys;
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid json: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a json object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) {
      throw ConfigError("config: unknown key '" + item.key() + "'");
    }
  }

  RunConfig cfg;
  take(j, "data_dir", cfg.data_dir);
  take(j, "dataset", cfg.dataset);
  take(j, "out_dir", cfg.out_dir);
  take(j, "window", cfg.window);
  take(j, "stride", cfg.stride);
  take(j, "r_max", cfg.r_max);
  take(j, "norm", cfg.norm);
  take(j, "clusters", cfg.clusters);
  take(j, "kmeans_seed", cfg.kmeans_seed);
  take(j, "lambda", cfg.lambda);
  take(j, "edge_measure", cfg.edge_measure);
  take(j, "variant", cfg.variant);
  take(j, "gcn_hidden", cfg.gcn_hidden);
  take(j, "heads_spatial", cfg.heads_spatial);
  take(j, "heads_temporal", cfg.heads_temporal);
  take(j, "kernel_size", cfg.kernel_size);
  take(j, "tcn_channels1", cfg.tcn_channels1);
  take(j, "tcn_channels2", cfg.tcn_channels2);
  take(j, "leaky_slope", cfg.leaky_slope);
  take(j, "dropout", cfg.dropout);
  take(j, "epochs", cfg.epochs);
  take(j, "batch_size", cfg.batch_size);
  take(j, "lr", cfg.lr);
  take(j, "beta1", cfg.beta1);
  take(j, "beta2", cfg.beta2);
  take(j, "eps", cfg.eps);
  take(j, "trials", cfg.trials);
  take(j, "seed", cfg.seed);
  take(j, "backend", cfg.backend);
  take(j, "deterministic", cfg.deterministic);
  take(j, "parallel_trials", cfg.parallel_trials);
  take(j, "identity_attention", cfg.identity_attention);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return run_config_from_json(text);
}

std::string run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["data_dir"] = cfg.data_dir;
  j["dataset"] = cfg.dataset;
  j["out_dir"] = cfg.out_dir;
  j["window"] = cfg.window;
  j["stride"] = cfg.stride;
  j["r_max"] = cfg.r_max;
  j["norm"] = cfg.norm;
  j["clusters"] = cfg.clusters;
  j["kmeans_seed"] = cfg.kmeans_seed;
  j["lambda"] = cfg.lambda;
  j["edge_measure"] = cfg.edge_measure;
  j["variant"] = cfg.variant;
  j["gcn_hidden"] = cfg.gcn_hidden;
  j["heads_spatial"] = cfg.heads_spatial;
  j["heads_temporal"] = cfg.heads_temporal;
  j["kernel_size"] = cfg.kernel_size;
  j["tcn_channels1"] = cfg.tcn_channels1;
  j["tcn_channels2"] = cfg.tcn_channels2;
  j["leaky_slope"] = cfg.leaky_slope;
  j["dropout"] = cfg.dropout;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.lr;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["eps"] = cfg.eps;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["backend"] = cfg.backend;
  j["deterministic"] = cfg.deterministic;
  j["parallel_trials"] = cfg.parallel_trials;
  j["identity_attention"] = cfg.identity_attention;
  return j.dump(2) + "\n";
}

void validate_run_config(const RunConfig& cfg) {
  static const std::set<std::string> datasets{"FD001", "FD002", "FD003", "FD004"};
  if (!datasets.count(cfg.dataset)) {
    throw ConfigError("unknown dataset id '" + cfg.dataset + "' (expected FD001..FD004)");
  }
  if (cfg.window < 1) throw ConfigError("window must be at least 1");
  if (cfg.stride < 1) throw ConfigError("stride must be at least 1");
  if (!(cfg.r_max > 0.0)) throw ConfigError("r_max must be positive");
  if (cfg.norm != "unified" && cfg.norm != "clustered") {
    throw ConfigError("unknown norm mode '" + cfg.norm + "' (expected unified or clustered)");
  }
  if (cfg.clusters < 1) throw ConfigError("clusters must be at least 1");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw ConfigError("lambda must be in [0, 1]");
  parse_edge_measure(cfg.edge_measure);
  try {
    parse_variant(cfg.variant);
    kernels::parse_backend(cfg.backend);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be at least 1");
}

NormMode norm_mode(const RunConfig& cfg) {
  return cfg.norm == "unified" ? NormMode::kUnified : NormMode::kClustered;
}

EdgeMeasure parse_edge_measure(const std::string& name) {
  if (name == "correlation") return EdgeMeasure::kCorrelation;
  if (name == "covariance") return EdgeMeasure::kCovariance;
  throw ConfigError("unknown edge measure '" + name +
                    "' (expected correlation or covariance)");
}

std::string edge_measure_name(EdgeMeasure m) {
  return m == EdgeMeasure::kCorrelation ? "correlation" : "covariance";
}

ModelConfig make_model_config(const RunConfig& cfg) {
  ModelConfig mc;
  mc.variant = parse_variant(cfg.variant);
  mc.nodes = kChannels;
  mc.window = cfg.window;
  mc.gcn_hidden = cfg.gcn_hidden;
  mc.heads_spatial = cfg.heads_spatial;
  mc.heads_temporal = cfg.heads_temporal;
  mc.kernel_size = cfg.kernel_size;
  mc.tcn_channels1 = cfg.tcn_channels1;
  mc.tcn_channels2 = cfg.tcn_channels2;
  mc.leaky_slope = cfg.leaky_slope;
  mc.dropout = cfg.dropout;
  mc.seed = cfg.seed;
  mc.identity_attention = cfg.identity_attention;
  return mc;
}

TrainConfig make_train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.adam.lr = cfg.lr;
  tc.adam.beta1 = cfg.beta1;
  tc.adam.beta2 = cfg.beta2;
  tc.adam.eps = cfg.eps;
  tc.seed = cfg.seed;
  return tc;
}

std::filesystem::path train_file(const RunConfig& cfg) {
  return std::filesystem::path(cfg.data_dir) / ("train_" + cfg.dataset + ".txt");
}

std::filesystem::path test_file(const RunConfig& cfg) {
  return std::filesystem::path(cfg.data_dir) / ("test_" + cfg.dataset + ".txt");
}

std::filesystem::path rul_file(const RunConfig& cfg) {
  return std::filesystem::path(cfg.data_dir) / ("RUL_" + cfg.dataset + ".txt");
}

}  // namespace stagnn
