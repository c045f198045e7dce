#include "stagnn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "stagnn/dataset.hpp"
#include "stagnn/errors.hpp"
#include "stagnn/evaluate.hpp"
#include "stagnn/kernels.hpp"
#include "stagnn/textio.hpp"
#include "stagnn/train.hpp"

namespace stagnn {

namespace {

constexpr const char* kCheckpointTag = "stagnn-checkpoint/1";
constexpr const char* kExportTag = "stagnn-export/1";
constexpr const char* kPrepTag = "stagnn-prep/1";

std::string timestamp_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// the log is the only artifact that may differ between identical runs
void log_line(const OutPaths& paths, const std::string& msg) {
  std::ofstream out(paths.run_log(), std::ios::app);
  if (!out) throw FormatError("cannot write " + paths.run_log().string());
  out << timestamp_utc() << ' ' << msg << '\n';
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw FormatError("cannot create " + file.string());
  out << text;
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

CmapssData load_data(const RunConfig& cfg) {
  for (const auto& f : {train_file(cfg), test_file(cfg), rul_file(cfg)}) {
    if (!std::filesystem::exists(f)) throw ConfigError("missing data file " + f.string());
  }
  return parse_cmapss(train_file(cfg), test_file(cfg), rul_file(cfg));
}

// prep settings that later commands must agree with
nlohmann::ordered_json prep_manifest_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = kPrepTag;
  j["dataset"] = cfg.dataset;
  j["window"] = cfg.window;
  j["stride"] = cfg.stride;
  j["r_max"] = cfg.r_max;
  j["norm"] = cfg.norm;
  j["clusters"] = norm_mode(cfg) == NormMode::kUnified ? 1 : cfg.clusters;
  j["kmeans_seed"] = cfg.kmeans_seed;
  j["lambda"] = cfg.lambda;
  j["edge_measure"] = cfg.edge_measure;
  return j;
}

struct PrepArtifacts {
  NormStats norm;
  std::vector<double> adjacency;
  std::vector<double> propagation;
};

PrepArtifacts load_prep(const RunConfig& cfg) {
  OutPaths paths(cfg.out_dir);
  for (const auto& f : {paths.prep_manifest(), paths.norm_stats(), paths.adjacency(),
                        paths.propagation()}) {
    if (!std::filesystem::exists(f)) {
      throw ConfigError("missing prep artifact " + f.string() + "; run prep first");
    }
  }

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(paths.prep_manifest()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("prep manifest: invalid json: " + std::string(e.what()));
  }
  const nlohmann::json wanted = prep_manifest_json(cfg);
  for (const auto& item : wanted.items()) {
    if (!manifest.contains(item.key()) || manifest.at(item.key()) != item.value()) {
      throw ArtifactError("prep artifacts in " + paths.dir.string() +
                          " were made with a different '" + item.key() +
                          "'; rerun prep for this configuration");
    }
  }

  PrepArtifacts prep;
  prep.norm = load_norm_stats(paths.norm_stats());
  int rows = 0;
  int cols = 0;
  prep.adjacency = read_matrix_csv(paths.adjacency(), rows, cols);
  if (rows != kChannels || cols != kChannels) {
    throw ArtifactError("adjacency matrix is " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", expected " + std::to_string(kChannels) +
                        " channels");
  }
  prep.propagation = read_matrix_csv(paths.propagation(), rows, cols);
  if (rows != kChannels || cols != kChannels) {
    throw ArtifactError("propagation matrix is " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", expected " + std::to_string(kChannels) +
                        " channels");
  }
  return prep;
}

struct WindowBundle {
  std::vector<WindowSample> train;
  std::vector<WindowSample> test;
  int skipped_train_units = 0;
};

WindowBundle build_windows(const RunConfig& cfg, const NormStats& stats,
                           const CmapssData& data) {
  const std::vector<Trajectory> norm_train = apply_norm(stats, data.train);
  const std::vector<Trajectory> norm_test = apply_norm(stats, data.test);
  WindowSet train_set =
      make_windows(norm_train, nullptr, cfg.window, cfg.stride, cfg.r_max, WindowMode::kTrain);
  WindowSet test_set = make_windows(norm_test, &data.test_rul, cfg.window, cfg.stride,
                                    cfg.r_max, WindowMode::kTest);
  if (train_set.samples.empty()) {
    throw ConfigError("no training windows; every unit is shorter than the window");
  }
  return {std::move(train_set.samples), std::move(test_set.samples),
          train_set.skipped_short_units};
}

std::string report_csv(const TrainReport& report) {
  std::ostringstream csv;
  csv << "metric,trial,epoch,value\n";
  for (const TrialResult& t : report.trials) {
    for (const EpochRecord& e : t.epochs) {
      csv << "loss," << t.trial << ',' << e.epoch << ',' << format_double(e.loss) << '\n';
    }
    csv << "rmse," << t.trial << ",," << format_double(t.rmse) << '\n';
    csv << "score," << t.trial << ",," << format_double(t.score) << '\n';
  }
  csv << "rmse_mean,,," << format_double(report.rmse_mean) << '\n';
  csv << "rmse_std,,," << format_double(report.rmse_std) << '\n';
  csv << "score_mean,,," << format_double(report.score_mean) << '\n';
  csv << "score_std,,," << format_double(report.score_std) << '\n';
  return csv.str();
}

nlohmann::ordered_json model_config_json(const ModelConfig& mc) {
  nlohmann::ordered_json j;
  j["variant"] = variant_name(mc.variant);
  j["nodes"] = mc.nodes;
  j["window"] = mc.window;
  j["gcn_hidden"] = mc.gcn_hidden;
  j["heads_spatial"] = mc.heads_spatial;
  j["heads_temporal"] = mc.heads_temporal;
  j["kernel_size"] = mc.kernel_size;
  j["tcn_channels1"] = mc.tcn_channels1;
  j["tcn_channels2"] = mc.tcn_channels2;
  j["leaky_slope"] = mc.leaky_slope;
  j["dropout"] = mc.dropout;
  j["seed"] = mc.seed;
  j["identity_attention"] = mc.identity_attention;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig mc;
  try {
    mc.variant = parse_variant(j.at("variant").get<std::string>());
    mc.nodes = j.at("nodes").get<int>();
    mc.window = j.at("window").get<int>();
    mc.gcn_hidden = j.at("gcn_hidden").get<int>();
    mc.heads_spatial = j.at("heads_spatial").get<int>();
    mc.heads_temporal = j.at("heads_temporal").get<int>();
    mc.kernel_size = j.at("kernel_size").get<int>();
    mc.tcn_channels1 = j.at("tcn_channels1").get<int>();
    mc.tcn_channels2 = j.at("tcn_channels2").get<int>();
    mc.leaky_slope = j.at("leaky_slope").get<double>();
    mc.dropout = j.at("dropout").get<double>();
    mc.seed = j.at("seed").get<std::uint64_t>();
    mc.identity_attention = j.at("identity_attention").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError("checkpoint: bad model configuration: " + std::string(e.what()));
  } catch (const ParameterError& e) {
    throw ArtifactError("checkpoint: " + std::string(e.what()));
  }
  return mc;
}

void select_run_backend(const RunConfig& cfg) {
  kernels::select_backend(kernels::parse_backend(cfg.backend));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& cp,
                     const Model& model) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointTag;
  j["dataset"] = cp.dataset;
  j["stride"] = cp.stride;
  j["r_max"] = cp.r_max;
  j["model"] = model_config_json(cp.model);
  j["norm"] = nlohmann::ordered_json::parse(norm_stats_to_json(cp.norm));
  nlohmann::ordered_json graph;
  graph["lambda"] = cp.lambda;
  graph["measure"] = edge_measure_name(cp.measure);
  graph["nodes"] = cp.model.nodes;
  graph["adjacency"] = cp.adjacency;
  graph["propagation"] = cp.propagation;
  j["graph"] = graph;
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const Parameter& p : model.parameters()) {
    nlohmann::ordered_json entry;
    entry["name"] = p.name;
    entry["shape"] = p.value.shape();
    entry["data"] = p.value.data_vec();
    params.push_back(std::move(entry));
  }
  j["parameters"] = std::move(params);
  write_text(file, j.dump(2) + "\n");
}

std::pair<Checkpoint, Model> load_checkpoint(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) {
    throw ConfigError("missing checkpoint " + file.string() + "; run train first");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(file));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint: invalid json: " + std::string(e.what()));
  }
  if (!j.contains("format") || j["format"] != kCheckpointTag) {
    throw ArtifactError("checkpoint: missing or unknown format tag");
  }

  Checkpoint cp;
  try {
    cp.dataset = j.at("dataset").get<std::string>();
    cp.stride = j.at("stride").get<int>();
    cp.r_max = j.at("r_max").get<double>();
    const auto& graph = j.at("graph");
    cp.lambda = graph.at("lambda").get<double>();
    cp.measure = parse_edge_measure(graph.at("measure").get<std::string>());
    cp.adjacency = graph.at("adjacency").get<std::vector<double>>();
    cp.propagation = graph.at("propagation").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError("checkpoint: missing or bad field: " + std::string(e.what()));
  } catch (const ConfigError& e) {
    throw ArtifactError("checkpoint: " + std::string(e.what()));
  }
  cp.model = model_config_from_json(j.at("model"));
  try {
    cp.norm = norm_stats_from_json(j.at("norm").dump());
  } catch (const FormatError& e) {
    throw ArtifactError("checkpoint: " + std::string(e.what()));
  }

  const std::size_t cells = static_cast<std::size_t>(cp.model.nodes) *
                            static_cast<std::size_t>(cp.model.nodes);
  if (uses_graph(cp.model.variant) && cp.propagation.size() != cells) {
    throw ArtifactError("checkpoint: propagation matrix does not match the node count");
  }

  std::optional<Model> model;
  try {
    model.emplace(cp.model,
                  uses_graph(cp.model.variant) ? cp.propagation : std::vector<double>{});
  } catch (const std::runtime_error& e) {
    throw ArtifactError("checkpoint: stored configuration is not buildable: " +
                        std::string(e.what()));
  }

  if (!j.contains("parameters") || !j["parameters"].is_array()) {
    throw ArtifactError("checkpoint: missing parameter list");
  }
  std::size_t assigned = 0;
  for (const auto& entry : j["parameters"]) {
    std::string name;
    std::vector<double> data;
    try {
      name = entry.at("name").get<std::string>();
      data = entry.at("data").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ArtifactError("checkpoint: bad parameter entry: " + std::string(e.what()));
    }
    if (!model->has_parameter(name)) {
      throw ArtifactError("checkpoint: parameter '" + name +
                          "' does not exist in the stored configuration");
    }
    try {
      model->set_parameter(name, data);
    } catch (const DimensionError& e) {
      throw ArtifactError("checkpoint: parameter '" + name + "': " + std::string(e.what()));
    }
    ++assigned;
  }
  if (assigned != model->parameters().size()) {
    throw ArtifactError("checkpoint: expected " + std::to_string(model->parameters().size()) +
                        " parameters, found " + std::to_string(assigned));
  }
  return {std::move(cp), std::move(*model)};
}

void cmd_prep(const RunConfig& cfg) {
  validate_run_config(cfg);
  OutPaths paths(cfg.out_dir);
  std::filesystem::create_directories(paths.dir);

  const CmapssData data = load_data(cfg);
  const NormStats stats = fit_norm(data.train, norm_mode(cfg), cfg.clusters, cfg.kmeans_seed);
  const std::vector<Trajectory> norm_train = apply_norm(stats, data.train);
  const SensorGraph graph =
      build_graph(norm_train, cfg.lambda, parse_edge_measure(cfg.edge_measure));
  const WindowBundle windows = build_windows(cfg, stats, data);

  int linked_pairs = 0;
  for (double a : graph.adjacency) {
    if (a != 0.0) ++linked_pairs;
  }

  save_norm_stats(paths.norm_stats(), stats);
  write_matrix_csv(paths.adjacency(), graph.adjacency, kChannels, kChannels);
  write_matrix_csv(paths.propagation(), graph.propagation, kChannels, kChannels);
  write_text(paths.prep_manifest(), prep_manifest_json(cfg).dump(2) + "\n");

  std::ostringstream sum;
  sum << "key,value\n";
  sum << "dataset," << cfg.dataset << '\n';
  sum << "channels," << kChannels << '\n';
  sum << "train_units," << data.train.size() << '\n';
  sum << "test_units," << data.test.size() << '\n';
  sum << "train_windows," << windows.train.size() << '\n';
  sum << "test_windows," << windows.test.size() << '\n';
  sum << "skipped_train_units," << windows.skipped_train_units << '\n';
  sum << "window," << cfg.window << '\n';
  sum << "stride," << cfg.stride << '\n';
  sum << "r_max," << format_double(cfg.r_max) << '\n';
  sum << "norm_mode," << cfg.norm << '\n';
  sum << "clusters," << stats.k << '\n';
  sum << "kmeans_seed," << cfg.kmeans_seed << '\n';
  sum << "lambda," << format_double(cfg.lambda) << '\n';
  sum << "edge_measure," << cfg.edge_measure << '\n';
  sum << "graph_edges," << linked_pairs / 2 << '\n';
  write_text(paths.prep_summary(), sum.str());

  log_line(paths, "prep dataset=" + cfg.dataset + " train_units=" +
                      std::to_string(data.train.size()) + " test_units=" +
                      std::to_string(data.test.size()) + " train_windows=" +
                      std::to_string(windows.train.size()) + " graph_edges=" +
                      std::to_string(linked_pairs / 2));
  std::printf("prep: %s, %zu train units, %zu test units, %zu train windows, %d graph edges\n",
              cfg.dataset.c_str(), data.train.size(), data.test.size(), windows.train.size(),
              linked_pairs / 2);
}

void cmd_train(const RunConfig& cfg) {
  validate_run_config(cfg);
  select_run_backend(cfg);
  OutPaths paths(cfg.out_dir);
  const PrepArtifacts prep = load_prep(cfg);
  const CmapssData data = load_data(cfg);
  const WindowBundle windows = build_windows(cfg, prep.norm, data);

  const ModelConfig mc = make_model_config(cfg);
  const TrainConfig tc = make_train_config(cfg);
  const bool parallel = cfg.parallel_trials && !cfg.deterministic;
  std::string note;
  if (cfg.parallel_trials && cfg.deterministic) {
    note = " (parallel trials disabled in deterministic mode)";
  }
  log_line(paths, "train start dataset=" + cfg.dataset + " variant=" + cfg.variant +
                      " trials=" + std::to_string(cfg.trials) + " epochs=" +
                      std::to_string(cfg.epochs) + " backend=" + kernels::active_name() + note);

  std::optional<Model> first;
  const TrainReport report = run_trials(
      mc, tc, cfg.trials, cfg.seed,
      uses_graph(mc.variant) ? prep.propagation : std::vector<double>{}, windows.train,
      windows.test, cfg.r_max, &first, parallel);

  write_text(paths.train_report(), report_csv(report));

  Checkpoint cp;
  cp.dataset = cfg.dataset;
  cp.stride = cfg.stride;
  cp.r_max = cfg.r_max;
  cp.lambda = cfg.lambda;
  cp.measure = parse_edge_measure(cfg.edge_measure);
  cp.norm = prep.norm;
  cp.adjacency = prep.adjacency;
  cp.propagation = prep.propagation;
  cp.model = first->config();
  save_checkpoint(paths.checkpoint(), cp, *first);

  for (const TrialResult& t : report.trials) {
    log_line(paths, "trial " + std::to_string(t.trial) + " rmse=" + format_double(t.rmse) +
                        " score=" + format_double(t.score) + " seconds=" +
                        format_double(t.seconds));
  }
  log_line(paths, "train done rmse_mean=" + format_double(report.rmse_mean) +
                      " score_mean=" + format_double(report.score_mean));
  std::printf("rmse mean=%s std=%s\n", format_double(report.rmse_mean).c_str(),
              format_double(report.rmse_std).c_str());
  std::printf("score mean=%s std=%s\n", format_double(report.score_mean).c_str(),
              format_double(report.score_std).c_str());
}

void cmd_eval(const RunConfig& cfg) {
  validate_run_config(cfg);
  select_run_backend(cfg);
  OutPaths paths(cfg.out_dir);
  auto [cp, model] = load_checkpoint(paths.checkpoint());
  if (cp.dataset != cfg.dataset) {
    throw ArtifactError("checkpoint was trained on " + cp.dataset + " but the run asks for " +
                        cfg.dataset);
  }

  const CmapssData data = load_data(cfg);
  const std::vector<Trajectory> norm_test = apply_norm(cp.norm, data.test);
  const WindowSet test_set = make_windows(norm_test, &data.test_rul, cp.model.window,
                                          cp.stride, cp.r_max, WindowMode::kTest);
  const EvalResult result = evaluate_model(model, test_set.samples, cp.r_max);

  std::ostringstream preds;
  preds << "unit_id,true_rul,predicted_rul\n";
  for (const UnitPrediction& p : result.predictions) {
    preds << p.unit_id << ',' << format_double(p.actual) << ',' << format_double(p.predicted)
          << '\n';
  }
  write_text(paths.predictions(), preds.str());

  std::ostringstream metrics;
  metrics << "metric,value\n";
  metrics << "rmse," << format_double(result.rmse) << '\n';
  metrics << "score," << format_double(result.score) << '\n';
  write_text(paths.metrics(), metrics.str());

  log_line(paths, "eval dataset=" + cfg.dataset + " units=" +
                      std::to_string(result.predictions.size()) + " rmse=" +
                      format_double(result.rmse) + " score=" + format_double(result.score));
  std::printf("rmse %s\n", format_double(result.rmse).c_str());
  std::printf("score %s\n", format_double(result.score).c_str());
}

void cmd_ablation(const RunConfig& cfg) {
  validate_run_config(cfg);
  select_run_backend(cfg);
  OutPaths paths(cfg.out_dir);
  const PrepArtifacts prep = load_prep(cfg);
  const CmapssData data = load_data(cfg);
  const WindowBundle windows = build_windows(cfg, prep.norm, data);
  const TrainConfig tc = make_train_config(cfg);
  const bool parallel = cfg.parallel_trials && !cfg.deterministic;

  log_line(paths, "ablation start dataset=" + cfg.dataset + " trials=" +
                      std::to_string(cfg.trials) + " epochs=" + std::to_string(cfg.epochs));
  std::ostringstream csv;
  csv << "variant,rmse_mean,rmse_std,score_mean,score_std\n";
  for (Variant v : all_variants()) {
    ModelConfig mc = make_model_config(cfg);
    mc.variant = v;
    const TrainReport report = run_trials(
        mc, tc, cfg.trials, cfg.seed,
        uses_graph(v) ? prep.propagation : std::vector<double>{}, windows.train, windows.test,
        cfg.r_max, nullptr, parallel);
    csv << variant_name(v) << ',' << format_double(report.rmse_mean) << ','
        << format_double(report.rmse_std) << ',' << format_double(report.score_mean) << ','
        << format_double(report.score_std) << '\n';
    log_line(paths, "ablation " + variant_name(v) + " rmse_mean=" +
                        format_double(report.rmse_mean) + " score_mean=" +
                        format_double(report.score_mean));
  }
  write_text(paths.ablation(), csv.str());
  log_line(paths, "ablation done");
  std::printf("wrote %s (%zu variants)\n", paths.ablation().string().c_str(),
              all_variants().size());
}

void cmd_export(const RunConfig& cfg, int unit, int window_index) {
  validate_run_config(cfg);
  select_run_backend(cfg);
  OutPaths paths(cfg.out_dir);
  auto [cp, model] = load_checkpoint(paths.checkpoint());
  if (cp.dataset != cfg.dataset) {
    throw ArtifactError("checkpoint was trained on " + cp.dataset + " but the run asks for " +
                        cfg.dataset);
  }

  const CmapssData data = load_data(cfg);
  std::size_t index = data.test.size();
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    if (data.test[i].unit_id == unit) {
      index = i;
      break;
    }
  }
  if (index == data.test.size()) {
    throw SelectionError("no test unit " + std::to_string(unit) + " in " + cfg.dataset);
  }

  const std::vector<Trajectory> norm_one =
      apply_norm(cp.norm, {data.test[index]});
  const Trajectory& traj = norm_one[0];
  const double final_rul = data.test_rul[index];
  const int w = cp.model.window;
  const int stride = cp.stride;

  WindowSample sample;
  if (window_index == 0) {
    const std::vector<double> rul_one{final_rul};
    const WindowSet set =
        make_windows(norm_one, &rul_one, w, stride, cp.r_max, WindowMode::kTest);
    sample = set.samples.at(0);
  } else {
    const std::vector<double> labels =
        window_labels(traj.cycles(), w, stride, cp.r_max, final_rul);
    if (window_index < 0 || static_cast<std::size_t>(window_index) > labels.size()) {
      throw SelectionError("unit " + std::to_string(unit) + " has " +
                           std::to_string(labels.size()) + " windows; index " +
                           std::to_string(window_index) + " matches nothing");
    }
    sample.unit_id = unit;
    sample.window_index = window_index;
    sample.label = labels[static_cast<std::size_t>(window_index - 1)];
    const int start = (window_index - 1) * stride;
    sample.features.reserve(static_cast<std::size_t>(w) * kChannels);
    for (int t = 0; t < w; ++t) {
      const auto& row = traj.rows[static_cast<std::size_t>(start + t)];
      sample.features.insert(sample.features.end(), row.begin(), row.end());
    }
  }

  Tape tape;
  ForwardCapture capture;
  const Tensor x = Tensor::from_data({cp.model.window, cp.model.nodes}, sample.features);
  const double raw = model.forward(tape, x, nullptr, &capture).item();
  const double prediction = std::clamp(raw, 0.0, cp.r_max);

  const int nodes = cp.model.nodes;
  nlohmann::ordered_json alpha_layers = nlohmann::ordered_json::array();
  for (const auto& layer : capture.spatial_alpha) {
    nlohmann::ordered_json heads = nlohmann::ordered_json::array();
    for (const auto& head : layer) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (int i = 0; i < nodes; ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int j = 0; j < nodes; ++j) {
          row.push_back(head[static_cast<std::size_t>(i * nodes + j)]);
        }
        rows.push_back(std::move(row));
      }
      heads.push_back(std::move(rows));
    }
    alpha_layers.push_back(std::move(heads));
  }
  nlohmann::ordered_json beta_layers = nlohmann::ordered_json::array();
  for (const auto& layer : capture.temporal_beta) {
    nlohmann::ordered_json heads = nlohmann::ordered_json::array();
    for (const auto& head : layer) heads.push_back(head);
    beta_layers.push_back(std::move(heads));
  }

  nlohmann::ordered_json j;
  j["format"] = kExportTag;
  j["dataset"] = cfg.dataset;
  j["unit"] = unit;
  j["window_index"] = window_index;  // 0 means the benchmark (final) window
  j["window"] = w;
  j["nodes"] = nodes;
  j["label"] = sample.label;
  j["prediction"] = prediction;
  j["spatial_alpha"] = std::move(alpha_layers);
  j["temporal_beta"] = std::move(beta_layers);
  j["features"] = capture.features;
  write_text(paths.export_file(), j.dump(2) + "\n");

  log_line(paths, "export dataset=" + cfg.dataset + " unit=" + std::to_string(unit) +
                      " window_index=" + std::to_string(window_index) + " prediction=" +
                      format_double(prediction));
  std::printf("wrote %s (unit %d, prediction %s)\n", paths.export_file().string().c_str(),
              unit, format_double(prediction).c_str());
}

}  // namespace stagnn
