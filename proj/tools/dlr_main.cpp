#include <cmath>
#include <iostream>

#include "CLI11.hpp"
#include "dlr/commands.hpp"
#include "dlr/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"delay-loop reservoir computing pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dlr 1.0.0");

  dlr::CommandContext ctx;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ctx.config_path, "key=value run config file");
    sub->add_option("--seed", ctx.seed, "override the config seed");
    sub->add_option("--out", ctx.out_dir, "output directory")
        ->capture_default_str();
    sub->add_flag("--quiet", ctx.quiet, "suppress the stdout tables");
    sub->add_option("--threads", ctx.threads,
                    "worker threads (0 = runtime default)");
    return sub;
  };

  auto* synth = add_common(app.add_subcommand(
      "synth", "generate emitter captures and a labeled dataset"));

  std::string in_dir, out_path, dataset_path, weights_path;
  auto* corrupt_cmd = add_common(app.add_subcommand(
      "corrupt", "extract bursts with jitter/noise corruption applied"));
  corrupt_cmd->add_option("input", in_dir, "directory of capture_<label>.dlrc")
      ->required();
  corrupt_cmd->add_option("output", out_path, "output dataset path")->required();

  auto* extract_cmd = add_common(app.add_subcommand(
      "extract", "detect bursts in captures and build a dataset"));
  extract_cmd->add_option("input", in_dir, "directory of capture_<label>.dlrc")
      ->required();
  extract_cmd->add_option("output", out_path, "output dataset path")->required();

  auto* train_cmd = add_common(
      app.add_subcommand("train", "train the ridge readout on a dataset"));
  train_cmd->add_option("dataset", dataset_path, "DLRD dataset")->required();

  auto* infer_cmd = add_common(
      app.add_subcommand("infer", "run saved weights over a dataset"));
  infer_cmd->add_option("dataset", dataset_path, "DLRD dataset")->required();
  infer_cmd->add_option("weights", weights_path, "DLRW weights")->required();

  auto* sweep_cmd = add_common(
      app.add_subcommand("sweep", "rank hyperparameter grid cells"));
  sweep_cmd->add_option("dataset", dataset_path, "DLRD dataset")->required();

  auto* saliency_cmd = add_common(app.add_subcommand(
      "saliency", "accuracy over sub-burst windows of the captures"));
  saliency_cmd->add_option("input", in_dir, "directory of capture_<label>.dlrc")
      ->required();

  auto* mackey_cmd = add_common(app.add_subcommand(
      "mackey", "Mackey-Glass one-step prediction benchmark"));

  double eta = 0.5, alpha = NAN;
  int traversals = 1000;
  auto* stability_cmd = add_common(app.add_subcommand(
      "stability", "closed-loop and averaged gain criteria"));
  stability_cmd->add_option("--eta", eta, "one-pass loop gain")
      ->capture_default_str();
  stability_cmd->add_option("--alpha", alpha,
                            "averaged-gain alpha (defaults to eta)");
  stability_cmd->add_option("--traversals", traversals, "loop traversals K")
      ->capture_default_str();

  dlr::FomInputs fin;
  auto* fom_cmd = add_common(app.add_subcommand(
      "fom", "figure-of-merit and latency calculators"));
  fom_cmd->add_option("--q", fin.q, "classes")->capture_default_str();
  fom_cmd->add_option("--n", fin.n, "reservoir size")->capture_default_str();
  fom_cmd->add_option("--b", fin.b, "training datapoints")
      ->capture_default_str();
  fom_cmd->add_option("--m-rnn", fin.m_rnn, "baseline parameter count")
      ->capture_default_str();
  fom_cmd->add_option("--c-rnn", fin.c_rnn, "baseline training operations")
      ->capture_default_str();
  fom_cmd->add_option("--delta-rnn", fin.delta_rnn,
                      "baseline latency, s (0 skips LRF)");
  fom_cmd->add_option("--delta-d", fin.delta_d, "per-datapoint loop time, s")
      ->capture_default_str();
  fom_cmd->add_option("--f-bus", fin.f_bus, "bus clock, Hz")
      ->capture_default_str();
  fom_cmd->add_option("--delta-rr", fin.delta_rr, "readout training latency, s")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(synth)) return dlr::cmd_synth(ctx);
    if (app.got_subcommand(corrupt_cmd))
      return dlr::cmd_corrupt(ctx, in_dir, out_path);
    if (app.got_subcommand(extract_cmd))
      return dlr::cmd_extract(ctx, in_dir, out_path);
    if (app.got_subcommand(train_cmd)) return dlr::cmd_train(ctx, dataset_path);
    if (app.got_subcommand(infer_cmd))
      return dlr::cmd_infer(ctx, dataset_path, weights_path);
    if (app.got_subcommand(sweep_cmd)) return dlr::cmd_sweep(ctx, dataset_path);
    if (app.got_subcommand(saliency_cmd)) return dlr::cmd_saliency(ctx, in_dir);
    if (app.got_subcommand(mackey_cmd)) return dlr::cmd_mackey(ctx);
    if (app.got_subcommand(stability_cmd)) {
      if (stability_cmd->count("--alpha") == 0) alpha = eta;
      return dlr::cmd_stability(ctx, eta, alpha, traversals);
    }
    if (app.got_subcommand(fom_cmd)) return dlr::cmd_fom(ctx, fin);
  } catch (const dlr::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const dlr::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
