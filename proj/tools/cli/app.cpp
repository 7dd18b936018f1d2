#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "broadcd/error.hpp"
#include "broadcd/png_io.hpp"
#include "cli/commands.hpp"

namespace broadcd::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Inlines `--config FILE` (key=value lines) ahead of the command-line flags.
// Keys given on the command line are not taken from the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> cmdline;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      cmdline.push_back(args[i]);
    }
  }
  if (config_path.empty()) return cmdline;

  std::set<std::string> given;
  for (const std::string& a : cmdline) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  }

  std::ifstream in(config_path);
  if (!in) throw StageError("config", "cannot read config file " + config_path);
  std::vector<std::string> from_file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw StageError("config", config_path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (given.count(flag)) continue;
    from_file.push_back(flag);
    from_file.push_back(trim(line.substr(eq + 1)));
  }

  // The subcommand name must stay first.
  std::vector<std::string> out;
  auto it = cmdline.begin();
  if (it != cmdline.end() && it->rfind("-", 0) != 0) out.push_back(*it++);
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), it, cmdline.end());
  return out;
}

void add_data_flags(CLI::App* cmd, DataSource& d) {
  cmd->add_option("--ref", d.ref, "Reference image (PNG)");
  cmd->add_option("--test", d.test, "Test image (PNG)");
  cmd->add_option("--mask", d.mask, "Ground-truth change mask (PNG)");
  cmd->add_option("--scenes-root", d.scenes_root, "Pool every <root>/<scene>/{ref,test,mask}.png");
}

void add_net_flags(CLI::App* cmd, broadnet::BroadNetConfig& net, bool sweep) {
  if (!sweep) {
    cmd->add_option("--layers", net.max_layers, "Maximum number of enhancement layers")->capture_default_str();
    cmd->add_option("--compression", net.compression, "Width ratio of consecutive layers")->capture_default_str();
  }
  cmd->add_option("--first-layer-width", net.first_layer_width, "Width of the first enhancement layer")
      ->capture_default_str();
  cmd->add_option("--afs-epsilon", net.afs_epsilon, "Stop when the CV AFS gain drops below this")
      ->capture_default_str();
  cmd->add_option("--cv-folds", net.cv_folds, "Stratified folds for the stopping rule")->capture_default_str();
  cmd->add_option("--ridge-lambda", net.ridge_lambda, "Ridge term of the output solve")->capture_default_str();
  cmd->add_option("--l1-weight", net.autoencoder.l1_weight, "Autoencoder L1 penalty")->capture_default_str();
  cmd->add_option("--ae-iterations", net.autoencoder.max_iterations, "Autoencoder iteration cap")
      ->capture_default_str();
  cmd->add_option("--ae-tolerance", net.autoencoder.step_tolerance, "Autoencoder relative-change tolerance")
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Aerial change detection with a recursively grown broad learning classifier", "broadcd"};
  app.require_subcommand(1);

  SynthConfig synth_cfg;
  fs::path synth_out = ".";
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic ref/test/mask fixture");
  synth_cmd->add_option("--width", synth_cfg.width)->capture_default_str();
  synth_cmd->add_option("--height", synth_cfg.height)->capture_default_str();
  synth_cmd->add_option("--rect-x", synth_cfg.rect_x)->capture_default_str();
  synth_cmd->add_option("--rect-y", synth_cfg.rect_y)->capture_default_str();
  synth_cmd->add_option("--rect-w", synth_cfg.rect_w)->capture_default_str();
  synth_cmd->add_option("--rect-h", synth_cfg.rect_h)->capture_default_str();
  synth_cmd->add_option("--noise", synth_cfg.noise, "Gaussian sigma per channel")->capture_default_str();
  synth_cmd->add_option("--delta", synth_cfg.delta, "Intensity shift inside the rectangle")->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();

  TrainConfig train_cfg;
  std::size_t train_minority = 0;
  auto* train_cmd = app.add_subcommand("train", "Prepare, rebalance and fit; writes a model JSON");
  add_data_flags(train_cmd, train_cfg.data);
  train_cmd->add_option("--out", train_cfg.out, "Model output path");
  train_cmd->add_option("--ir", train_cfg.ratio, "Imbalance ratio majority:minority")->capture_default_str();
  train_cmd->add_option("--strategy", train_cfg.strategy, "randover | smote")->capture_default_str();
  auto* train_minority_opt = train_cmd->add_option("--minority-target", train_minority,
                                                   "Minority size after oversampling (default: natural count)");
  train_cmd->add_option("--smote-k", train_cfg.smote_k)->capture_default_str();
  train_cmd->add_option("--train-fraction", train_cfg.train_fraction)->capture_default_str();
  train_cmd->add_option("--seed", train_cfg.seed)->capture_default_str();
  add_net_flags(train_cmd, train_cfg.net, false);

  PredictConfig predict_cfg;
  auto* predict_cmd = app.add_subcommand("predict", "Render a change map with a trained model");
  predict_cmd->add_option("--model", predict_cfg.model)->required();
  predict_cmd->add_option("--ref", predict_cfg.ref)->required();
  predict_cmd->add_option("--test", predict_cfg.test)->required();
  predict_cmd->add_option("--out", predict_cfg.out, "Change-map PNG")->required();

  EvaluateConfig eval_cfg;
  auto* eval_cmd = app.add_subcommand("evaluate", "F-scores against a ground-truth mask");
  eval_cmd->add_option("--mask", eval_cfg.mask)->required();
  eval_cmd->add_option("--pred", eval_cfg.pred, "Predicted change map (PNG)");
  eval_cmd->add_option("--model", eval_cfg.model, "Model JSON (predicts from --ref/--test)");
  eval_cmd->add_option("--ref", eval_cfg.ref);
  eval_cmd->add_option("--test", eval_cfg.test);
  eval_cmd->add_option("--csv", eval_cfg.csv, "Append a report row to this CSV");
  eval_cmd->add_option("--subset", eval_cfg.subset, "all | test | test-matched (held-out split, undersampled to --ir)")
      ->capture_default_str();
  eval_cmd->add_option("--train-fraction", eval_cfg.train_fraction)->capture_default_str();
  eval_cmd->add_option("--seed", eval_cfg.seed)->capture_default_str();
  eval_cmd->add_option("--ir", eval_cfg.ratio, "Recorded in the CSV row")->capture_default_str();
  eval_cmd->add_option("--strategy", eval_cfg.strategy, "Recorded in the CSV row")->capture_default_str();
  eval_cmd->add_option("--layers", eval_cfg.layers, "Recorded when no model is given");
  eval_cmd->add_option("--compression", eval_cfg.compression, "Recorded when no model is given");

  SweepConfig sweep_cfg;
  std::size_t sweep_minority = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate a grid of configurations");
  add_data_flags(sweep_cmd, sweep_cfg.data);
  sweep_cmd->add_option("--out", sweep_cfg.out, "CSV output path");
  sweep_cmd->add_option("--ir", sweep_cfg.ratios, "Comma-separated ratios")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--strategy", sweep_cfg.strategies, "Comma-separated strategies")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--layers", sweep_cfg.layer_counts, "Comma-separated layer caps")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--compression", sweep_cfg.compressions, "Comma-separated compressions")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--heldout", sweep_cfg.heldout, "matched | natural held-out class ratio")
      ->capture_default_str();
  auto* sweep_minority_opt = sweep_cmd->add_option("--minority-target", sweep_minority);
  sweep_cmd->add_option("--smote-k", sweep_cfg.smote_k)->capture_default_str();
  sweep_cmd->add_option("--train-fraction", sweep_cfg.train_fraction)->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_cfg.seed)->capture_default_str();
  add_net_flags(sweep_cmd, sweep_cfg.net, true);

  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*synth_cmd) {
      write_fixture(synthesize(synth_cfg), synth_out);
      out << "wrote " << (synth_out / "ref.png").string() << ", test.png, mask.png\n";
    } else if (*train_cmd) {
      if (*train_minority_opt) train_cfg.minority_target = train_minority;
      train(train_cfg, out);
    } else if (*predict_cmd) {
      const GrayImage map = predict_map(predict_cfg);
      out << "wrote " << predict_cfg.out.string() << " (" << map.width << "x" << map.height << ")\n";
    } else if (*eval_cmd) {
      evaluate(eval_cfg, out);
    } else if (*sweep_cmd) {
      if (*sweep_minority_opt) sweep_cfg.minority_target = sweep_minority;
      sweep(sweep_cfg, out);
    }
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: [" << app.get_subcommands().front()->get_name() << "] " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace broadcd::cli
