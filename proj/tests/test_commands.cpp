#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stagnn/cli.hpp"
#include "stagnn/commands.hpp"
#include "stagnn/config.hpp"
#include "stagnn/dataset.hpp"
#include "stagnn/errors.hpp"
#include "stagnn/evaluate.hpp"
#include "support/synthetic_cmapss.hpp"

using namespace stagnn;

namespace {

std::filesystem::path temp_root(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const auto dir = std::filesystem::temp_directory_path() /
                   ("stagnn_cmd_" + tag + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

RunConfig toy_run(const std::filesystem::path& root) {
  testsupport::SyntheticOptions opt;
  opt.n_train = 8;
  opt.n_test = 5;
  opt.regimes = 1;
  opt.seed = 11;
  opt.min_len = 60;
  opt.max_len = 90;
  opt.min_rul = 5;
  opt.max_rul = 40;
  std::filesystem::create_directories(root / "data");
  testsupport::write_corpus(root / "data", "FD001", opt);

  RunConfig cfg;
  cfg.data_dir = (root / "data").string();
  cfg.out_dir = (root / "out").string();
  cfg.window = 20;
  cfg.norm = "unified";
  cfg.clusters = 1;
  cfg.lambda = 0.7;
  cfg.gcn_hidden = 8;
  cfg.heads_spatial = 1;
  cfg.heads_temporal = 1;
  cfg.tcn_channels1 = 8;
  cfg.tcn_channels2 = 4;
  cfg.epochs = 2;
  cfg.batch_size = 64;
  cfg.trials = 1;
  cfg.seed = 9;
  return cfg;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  REQUIRE(out);
  out << text;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  REQUIRE(in);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.ends_with(',')) cells.push_back("");
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string csv_value(const std::vector<std::vector<std::string>>& rows, const std::string& key) {
  for (const auto& row : rows) {
    if (!row.empty() && row[0] == key) return row.back();
  }
  FAIL("no csv row with key " << key);
  return "";
}

int call_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"stagnn"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("prep writes deterministic artifacts and a faithful summary") {
  const auto root = temp_root("prep");
  RunConfig cfg = toy_run(root);
  cmd_prep(cfg);

  OutPaths paths(cfg.out_dir);
  for (const auto& f : {paths.prep_manifest(), paths.norm_stats(), paths.adjacency(),
                        paths.propagation(), paths.prep_summary()}) {
    CHECK(std::filesystem::exists(f));
  }

  const auto summary = read_csv(paths.prep_summary());
  CHECK(csv_value(summary, "dataset") == "FD001");
  CHECK(csv_value(summary, "train_units") == "8");
  CHECK(csv_value(summary, "test_units") == "5");
  CHECK(csv_value(summary, "test_windows") == "5");
  CHECK(csv_value(summary, "channels") == "24");
  CHECK(csv_value(summary, "window") == "20");
  CHECK(csv_value(summary, "norm_mode") == "unified");
  CHECK(csv_value(summary, "skipped_train_units") == "0");

  const NormStats stats = load_norm_stats(paths.norm_stats());
  CHECK(stats.k == 1);
  CHECK(stats.mode == NormMode::kUnified);

  const std::string norm_bytes = read_file(paths.norm_stats());
  const std::string adj_bytes = read_file(paths.adjacency());
  const std::string prop_bytes = read_file(paths.propagation());
  const std::string sum_bytes = read_file(paths.prep_summary());
  cmd_prep(cfg);
  CHECK(read_file(paths.norm_stats()) == norm_bytes);
  CHECK(read_file(paths.adjacency()) == adj_bytes);
  CHECK(read_file(paths.propagation()) == prop_bytes);
  CHECK(read_file(paths.prep_summary()) == sum_bytes);

  std::filesystem::remove_all(root);
}

TEST_CASE("train writes report and checkpoint and reproduces itself byte for byte") {
  const auto root = temp_root("train");
  RunConfig cfg = toy_run(root);
  cfg.trials = 2;
  cmd_prep(cfg);
  cmd_train(cfg);

  OutPaths paths(cfg.out_dir);
  const auto report = read_csv(paths.train_report());
  REQUIRE(report.size() == 1 + 2 * (2 + 2) + 4);
  CHECK(report[0] == std::vector<std::string>{"metric", "trial", "epoch", "value"});

  double trial_rmse[2] = {0.0, 0.0};
  double rmse_mean = -1.0;
  int loss_rows = 0;
  for (const auto& row : report) {
    if (row[0] == "loss") ++loss_rows;
    if (row[0] == "rmse" && row[1] == "0") trial_rmse[0] = std::strtod(row[3].c_str(), nullptr);
    if (row[0] == "rmse" && row[1] == "1") trial_rmse[1] = std::strtod(row[3].c_str(), nullptr);
    if (row[0] == "rmse_mean") rmse_mean = std::strtod(row[3].c_str(), nullptr);
  }
  CHECK(loss_rows == 4);
  CHECK(rmse_mean == (trial_rmse[0] + trial_rmse[1]) / 2.0);

  const std::string report_bytes = read_file(paths.train_report());
  const std::string checkpoint_bytes = read_file(paths.checkpoint());
  cmd_train(cfg);
  CHECK(read_file(paths.train_report()) == report_bytes);
  CHECK(read_file(paths.checkpoint()) == checkpoint_bytes);

  SUBCASE("parallel trials change wall clock only") {
    RunConfig par = cfg;
    par.out_dir = (root / "out_par").string();
    par.deterministic = false;
    par.parallel_trials = true;
    cmd_prep(par);
    cmd_train(par);
    OutPaths ppaths(par.out_dir);
    CHECK(read_file(ppaths.train_report()) == report_bytes);
    CHECK(read_file(ppaths.checkpoint()) == checkpoint_bytes);
  }

  std::filesystem::remove_all(root);
}

TEST_CASE("prep artifacts are required and must match the configuration") {
  const auto root = temp_root("prepmatch");
  RunConfig cfg = toy_run(root);
  CHECK_THROWS_AS(cmd_train(cfg), ConfigError);

  cmd_prep(cfg);
  RunConfig other = cfg;
  other.window = 25;
  CHECK_THROWS_AS(cmd_train(other), ArtifactError);
  other = cfg;
  other.lambda = 0.2;
  CHECK_THROWS_AS(cmd_ablation(other), ArtifactError);

  cmd_train(cfg);
  std::filesystem::remove_all(root);
}

TEST_CASE("checkpoints rebuild the identical model and reject corruption") {
  const auto root = temp_root("checkpoint");
  RunConfig cfg = toy_run(root);
  cmd_prep(cfg);
  cmd_train(cfg);

  OutPaths paths(cfg.out_dir);
  const auto report = read_csv(paths.train_report());
  const double trial0_rmse = std::strtod(csv_value(report, "rmse").c_str(), nullptr);

  auto [cp, model] = load_checkpoint(paths.checkpoint());
  CHECK(cp.dataset == "FD001");
  CHECK(cp.model.window == 20);
  CHECK(cp.model.nodes == kChannels);

  const CmapssData data =
      parse_cmapss(train_file(cfg), test_file(cfg), rul_file(cfg));
  const auto norm_test = apply_norm(cp.norm, data.test);
  const WindowSet test_set = make_windows(norm_test, &data.test_rul, cp.model.window,
                                          cp.stride, cp.r_max, WindowMode::kTest);
  const EvalResult result = evaluate_model(model, test_set.samples, cp.r_max);
  CHECK(result.rmse == trial0_rmse);

  SUBCASE("a dropped parameter is an artifact error") {
    nlohmann::json j = nlohmann::json::parse(read_file(paths.checkpoint()));
    j["parameters"].erase(j["parameters"].size() - 1);
    write_file(paths.checkpoint(), j.dump(2));
    CHECK_THROWS_AS(load_checkpoint(paths.checkpoint()), ArtifactError);
  }

  SUBCASE("a wrong format tag is an artifact error") {
    nlohmann::json j = nlohmann::json::parse(read_file(paths.checkpoint()));
    j["format"] = "something-else";
    write_file(paths.checkpoint(), j.dump(2));
    CHECK_THROWS_AS(load_checkpoint(paths.checkpoint()), ArtifactError);
  }

  SUBCASE("a resized parameter is an artifact error") {
    nlohmann::json j = nlohmann::json::parse(read_file(paths.checkpoint()));
    j["parameters"][0]["data"].erase(0);
    write_file(paths.checkpoint(), j.dump(2));
    CHECK_THROWS_AS(load_checkpoint(paths.checkpoint()), ArtifactError);
  }

  SUBCASE("broken json is a format error") {
    write_file(paths.checkpoint(), "{ not json");
    CHECK_THROWS_AS(load_checkpoint(paths.checkpoint()), FormatError);
  }

  SUBCASE("a missing checkpoint is an input error") {
    std::filesystem::remove(paths.checkpoint());
    CHECK_THROWS_AS(cmd_eval(cfg), ConfigError);
  }

  std::filesystem::remove_all(root);
}

TEST_CASE("eval writes predictions that reproduce its metrics") {
  const auto root = temp_root("eval");
  RunConfig cfg = toy_run(root);
  cmd_prep(cfg);
  cmd_train(cfg);
  cmd_eval(cfg);

  OutPaths paths(cfg.out_dir);
  const auto preds = read_csv(paths.predictions());
  REQUIRE(preds.size() == 6);
  CHECK(preds[0] == std::vector<std::string>{"unit_id", "true_rul", "predicted_rul"});

  std::vector<double> errors;
  for (std::size_t i = 1; i < preds.size(); ++i) {
    const double actual = std::strtod(preds[i][1].c_str(), nullptr);
    const double predicted = std::strtod(preds[i][2].c_str(), nullptr);
    CHECK(predicted >= 0.0);
    CHECK(predicted <= cfg.r_max);
    errors.push_back(predicted - actual);
  }
  const auto metrics = read_csv(paths.metrics());
  CHECK(std::strtod(csv_value(metrics, "rmse").c_str(), nullptr) == rmse(errors));
  CHECK(std::strtod(csv_value(metrics, "score").c_str(), nullptr) == score(errors));

  SUBCASE("a dataset mismatch is an artifact error") {
    RunConfig other = cfg;
    other.dataset = "FD003";
    CHECK_THROWS_AS(cmd_eval(other), ArtifactError);
  }

  std::filesystem::remove_all(root);
}

TEST_CASE("ablation emits six rows and its stgnn row equals identity attention") {
  const auto root = temp_root("ablation");
  RunConfig cfg = toy_run(root);
  cfg.epochs = 3;
  cmd_prep(cfg);
  cmd_ablation(cfg);

  OutPaths paths(cfg.out_dir);
  const auto table = read_csv(paths.ablation());
  REQUIRE(table.size() == 7);
  CHECK(table[0] ==
        std::vector<std::string>{"variant", "rmse_mean", "rmse_std", "score_mean", "score_std"});
  const std::vector<std::string> expected{"gnn", "agnn", "tcn", "atcn", "stgnn", "stagnn"};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(table[i + 1][0] == expected[i]);
    for (std::size_t c = 1; c < 5; ++c) {
      CHECK(std::isfinite(std::strtod(table[i + 1][c].c_str(), nullptr)));
    }
  }

  RunConfig identity = cfg;
  identity.out_dir = (root / "out_identity").string();
  identity.variant = "stagnn";
  identity.identity_attention = true;
  cmd_prep(identity);
  cmd_train(identity);
  const auto report = read_csv(OutPaths(identity.out_dir).train_report());

  const auto& stgnn_row = table[5];
  REQUIRE(stgnn_row[0] == "stgnn");
  CHECK(stgnn_row[1] == csv_value(report, "rmse_mean"));
  CHECK(stgnn_row[2] == csv_value(report, "rmse_std"));
  CHECK(stgnn_row[3] == csv_value(report, "score_mean"));
  CHECK(stgnn_row[4] == csv_value(report, "score_std"));

  std::filesystem::remove_all(root);
}

TEST_CASE("export dumps normalized attention weights and round-trips") {
  const auto root = temp_root("export");
  RunConfig cfg = toy_run(root);
  cmd_prep(cfg);
  cmd_train(cfg);
  cmd_export(cfg, 3);

  OutPaths paths(cfg.out_dir);
  const nlohmann::json j = nlohmann::json::parse(read_file(paths.export_file()));
  CHECK(j.at("format") == "stagnn-export/1");
  CHECK(j.at("unit") == 3);
  CHECK(j.at("window_index") == 0);
  CHECK(j.at("nodes") == kChannels);

  const auto& alpha = j.at("spatial_alpha");
  REQUIRE(alpha.size() == 2);
  for (const auto& layer : alpha) {
    REQUIRE(layer.size() == 1);
    for (const auto& head : layer) {
      REQUIRE(head.size() == static_cast<std::size_t>(kChannels));
      for (const auto& row : head) {
        double sum = 0.0;
        for (const auto& v : row) sum += v.get<double>();
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
  const auto& beta = j.at("temporal_beta");
  REQUIRE(beta.size() == 2);
  for (const auto& layer : beta) {
    REQUIRE(layer.size() == 1);
    for (const auto& head : layer) {
      double sum = 0.0;
      for (const auto& v : head) sum += v.get<double>();
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(head.size() == static_cast<std::size_t>(cfg.gcn_hidden));
    }
  }
  CHECK(j.at("features").size() ==
        static_cast<std::size_t>(cfg.gcn_hidden * cfg.tcn_channels2));
  const double prediction = j.at("prediction").get<double>();
  CHECK(prediction >= 0.0);
  CHECK(prediction <= cfg.r_max);

  SUBCASE("an explicit window index changes the label accordingly") {
    const auto test_trajs = parse_trajectories(test_file(cfg));
    const auto ruls = parse_rul_file(rul_file(cfg));
    int unit3_cycles = 0;
    double unit3_rul = 0.0;
    for (std::size_t i = 0; i < test_trajs.size(); ++i) {
      if (test_trajs[i].unit_id == 3) {
        unit3_cycles = test_trajs[i].cycles();
        unit3_rul = ruls[i];
      }
    }
    REQUIRE(unit3_cycles >= cfg.window);
    cmd_export(cfg, 3, 1);
    const nlohmann::json first = nlohmann::json::parse(read_file(paths.export_file()));
    const double expect = std::min(
        static_cast<double>(unit3_cycles - cfg.window) + unit3_rul, cfg.r_max);
    CHECK(first.at("label").get<double>() == expect);
    CHECK(first.at("window_index") == 1);
  }

  SUBCASE("selectors that match nothing are selection errors") {
    CHECK_THROWS_AS(cmd_export(cfg, 99), SelectionError);
    CHECK_THROWS_AS(cmd_export(cfg, 3, 100000), SelectionError);
  }

  std::filesystem::remove_all(root);
}

TEST_CASE("run config json parsing is strict") {
  RunConfig cfg;
  cfg.dataset = "FD002";
  cfg.window = 31;
  cfg.parallel_trials = true;
  const RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.dataset == "FD002");
  CHECK(back.window == 31);
  CHECK(back.parallel_trials == true);
  CHECK(back.norm == cfg.norm);

  CHECK_THROWS_AS(run_config_from_json("{\"windw\": 3}"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("{\"window\": \"wide\"}"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("[1,2]"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("{"), ConfigError);

  RunConfig bad;
  bad.dataset = "FD009";
  CHECK_THROWS_AS(validate_run_config(bad), ConfigError);
  bad = RunConfig{};
  bad.norm = "zscore";
  CHECK_THROWS_AS(validate_run_config(bad), ConfigError);
  bad = RunConfig{};
  bad.lambda = 1.5;
  CHECK_THROWS_AS(validate_run_config(bad), ConfigError);
  bad = RunConfig{};
  bad.variant = "mlp";
  CHECK_THROWS_AS(validate_run_config(bad), ConfigError);
  bad = RunConfig{};
  bad.backend = "gpu";
  CHECK_THROWS_AS(validate_run_config(bad), ConfigError);
}

TEST_CASE("the cli maps outcomes onto documented exit codes") {
  const auto root = temp_root("cli");
  RunConfig cfg = toy_run(root);
  const std::string data = cfg.data_dir;
  const std::string out = cfg.out_dir;

  const std::vector<std::string> base{
      "--data-dir", data,           "--out-dir",      out,
      "--window",   "20",           "--norm",         "unified",
      "--clusters", "1",            "--lambda",       "0.7",
      "--gcn-hidden", "8",          "--heads-spatial", "1",
      "--heads-temporal", "1",      "--tcn-channels1", "8",
      "--tcn-channels2", "4",       "--epochs",       "2",
      "--batch-size", "64",         "--trials",       "1",
      "--seed",     "9"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = extra;
    args.insert(args.end(), base.begin(), base.end());
    return args;
  };
  auto with_override = [&](std::vector<std::string> extra, const std::string& flag,
                           const std::string& value) {
    std::vector<std::string> args = with(std::move(extra));
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == flag) args[i + 1] = value;
    }
    return args;
  };

  CHECK(call_cli(with({"train"})) == 2);  // prep artifacts missing
  CHECK(call_cli(with({"prep"})) == 0);
  CHECK(call_cli(with({"train"})) == 0);
  CHECK(call_cli(with({"eval"})) == 0);
  CHECK(call_cli(with({"export", "--unit", "3"})) == 0);
  CHECK(call_cli(with({"export", "--unit", "99"})) == 5);
  CHECK(call_cli(with_override({"train"}, "--window", "25")) == 4);
  CHECK(call_cli(with({"train", "--dataset", "FD009"})) == 2);
  CHECK(call_cli(with_override({"train"}, "--window", "wide")) == 2);
  CHECK(call_cli(with({"train", "--lr", "1e160"})) == 3);
  CHECK(call_cli({"--help"}) == 0);
  CHECK(call_cli({}) == 2);              // missing subcommand
  CHECK(call_cli({"prep", "--config", (root / "nope.json").string()}) == 2);

  SUBCASE("config files feed the cli and flags override them") {
    RunConfig file_cfg = cfg;
    file_cfg.out_dir = (root / "out_cfg").string();
    const auto cfg_path = root / "run.json";
    write_file(cfg_path, run_config_to_json(file_cfg));

    CHECK(call_cli({"prep", "--config", cfg_path.string()}) == 0);
    auto summary = read_csv(OutPaths(file_cfg.out_dir).prep_summary());
    CHECK(csv_value(summary, "window") == "20");

    CHECK(call_cli({"prep", "--config", cfg_path.string(), "--window", "25"}) == 0);
    summary = read_csv(OutPaths(file_cfg.out_dir).prep_summary());
    CHECK(csv_value(summary, "window") == "25");

    write_file(cfg_path, "{\"no_such_key\": 1}");
    CHECK(call_cli({"prep", "--config", cfg_path.string()}) == 2);
  }

  std::filesystem::remove_all(root);
}
