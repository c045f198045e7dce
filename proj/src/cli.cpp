#include "stagnn/cli.hpp"

#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>
#include <string_view>

#include <CLI11.hpp>

#include "stagnn/commands.hpp"
#include "stagnn/config.hpp"
#include "stagnn/errors.hpp"

namespace stagnn {

int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string config_path;

  // The config file provides the defaults the flags are parsed on top of, so
  // it has to be located and loaded before CLI11 runs.
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = std::string(arg.substr(9));
    }
  }
  if (!config_path.empty()) {
    try {
      cfg = load_run_config(config_path);
    } catch (const std::runtime_error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }

  CLI::App app{"sensor-graph attention network toolkit for turbofan RUL prediction"};
  app.require_subcommand(1);

  app.add_option("--config", config_path, "json run configuration; flags override its keys");
  app.add_option("--data-dir", cfg.data_dir, "directory with train_/test_/RUL_ files");
  app.add_option("--dataset", cfg.dataset, "sub-dataset id (FD001..FD004)");
  app.add_option("--out-dir", cfg.out_dir, "artifact directory");
  app.add_option("--window", cfg.window, "cycles per input window");
  app.add_option("--stride", cfg.stride, "training window stride");
  app.add_option("--r-max", cfg.r_max, "piecewise linear RUL cap");
  app.add_option("--norm", cfg.norm, "normalization mode: unified | clustered");
  app.add_option("--clusters", cfg.clusters, "operating condition clusters (K)");
  app.add_option("--kmeans-seed", cfg.kmeans_seed, "clustering seed");
  app.add_option("--lambda", cfg.lambda, "graph edge threshold in [0, 1]");
  app.add_option("--edge-measure", cfg.edge_measure, "correlation | covariance");
  app.add_option("--variant", cfg.variant, "gnn | agnn | tcn | atcn | stgnn | stagnn");
  app.add_option("--gcn-hidden", cfg.gcn_hidden, "graph embedding width");
  app.add_option("--heads-spatial", cfg.heads_spatial, "spatial attention heads");
  app.add_option("--heads-temporal", cfg.heads_temporal, "temporal attention heads");
  app.add_option("--kernel-size", cfg.kernel_size, "temporal convolution width");
  app.add_option("--tcn-channels1", cfg.tcn_channels1, "first temporal block channels");
  app.add_option("--tcn-channels2", cfg.tcn_channels2, "second temporal block channels");
  app.add_option("--leaky-slope", cfg.leaky_slope, "leaky relu slope in attention scores");
  app.add_option("--dropout", cfg.dropout, "dropout probability in temporal blocks");
  app.add_option("--epochs", cfg.epochs, "training epochs per trial");
  app.add_option("--batch-size", cfg.batch_size, "minibatch size");
  app.add_option("--lr", cfg.lr, "adam learning rate");
  app.add_option("--beta1", cfg.beta1, "adam first moment decay");
  app.add_option("--beta2", cfg.beta2, "adam second moment decay");
  app.add_option("--eps", cfg.eps, "adam denominator offset");
  app.add_option("--trials", cfg.trials, "independent trials (trial t uses seed + t)");
  app.add_option("--seed", cfg.seed, "base seed");
  app.add_option("--backend", cfg.backend, "kernel backend: auto | scalar | avx2");
  app.add_flag("--deterministic,!--no-deterministic", cfg.deterministic,
               "keep trials sequential and outputs byte-reproducible");
  app.add_flag("--parallel-trials,!--no-parallel-trials", cfg.parallel_trials,
               "run trials concurrently (ignored in deterministic mode)");
  app.add_flag("--identity-attention,!--no-identity-attention", cfg.identity_attention,
               "diagnostic: skip attention blocks, keep their parameters");

  CLI::App* prep = app.add_subcommand("prep", "fit normalization and build the sensor graph");
  CLI::App* train = app.add_subcommand("train", "run trials and write report + checkpoint");
  CLI::App* eval = app.add_subcommand("eval", "evaluate the checkpoint on the test split");
  CLI::App* ablation = app.add_subcommand("ablation", "compare all six model variants");
  CLI::App* exp = app.add_subcommand("export", "dump attention and features for one unit");
  int unit = 0;
  int window_index = 0;
  exp->add_option("--unit", unit, "test unit id to export")->required();
  exp->add_option("--window-index", window_index,
                  "1-based stride window; 0 picks the benchmark (final) window");
  for (CLI::App* sub : {prep, train, eval, ablation, exp}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(prep)) {
      cmd_prep(cfg);
    } else if (app.got_subcommand(train)) {
      cmd_train(cfg);
    } else if (app.got_subcommand(eval)) {
      cmd_eval(cfg);
    } else if (app.got_subcommand(ablation)) {
      cmd_ablation(cfg);
    } else if (app.got_subcommand(exp)) {
      cmd_export(cfg, unit, window_index);
    }
    return 0;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const SelectionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}

}  // namespace stagnn
