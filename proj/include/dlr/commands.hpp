#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlr/analysis.hpp"
#include "dlr/io.hpp"
#include "dlr/readout.hpp"
#include "dlr/reservoir.hpp"
#include "dlr/signal.hpp"
#include "dlr/synth.hpp"

namespace dlr {

struct RunSettings {
  ReservoirConfig reservoir;
  std::string normalization = "global";  // global | per_datapoint | none
  bool raw_features = false;
  double train_fraction = 0.8;
  bool lambda_auto = false;
  double lambda_fixed = 1e-4;
  std::vector<double> lambda_grid = {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2};
  bool warnings = true;  // not part of the fingerprint
};

RunSettings parse_run_settings(const KvConfig& cfg);
uint64_t settings_fingerprint(const RunSettings& s);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<int> confusion;  // num_classes x num_classes, row = true label
  int num_classes = 0;
  int n_train = 0;
  int n_test = 0;
  double lambda = 0.0;
  uint64_t seed = 0;
};

struct TrainOutcome {
  EvalReport report;
  WeightsArtifact weights;
  std::vector<size_t> train_indices;
  std::vector<size_t> test_indices;
};

struct TrainSplit {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

// Stratified split; indices come back in dataset order within each part.
TrainSplit stratified_split(const std::vector<Datapoint>& points, int num_classes,
                            double train_fraction, uint64_t seed);

// Applies the configured normalization in place and returns the fraction of
// datapoints that were rescaled (global mode rescales all or none).
double apply_normalization(std::vector<Datapoint>& points, const std::string& mode);

Matrix feature_matrix(const std::vector<Datapoint>& points, const std::vector<size_t>& idx,
                      const RunSettings& s, const LoopMasks& masks, const FilterKernel& filter);

TrainOutcome run_train(const Dataset& ds, const RunSettings& s);
EvalReport run_infer(const Dataset& ds, const RunSettings& s, const WeightsArtifact& w);

struct CommandContext {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir = ".";
  bool quiet = false;
  int threads = 0;

  KvConfig load_config() const;
};

int cmd_synth(const CommandContext& ctx);
int cmd_corrupt(const CommandContext& ctx, const std::string& in_dir, const std::string& out_path);
int cmd_extract(const CommandContext& ctx, const std::string& in_dir, const std::string& out_path);
int cmd_train(const CommandContext& ctx, const std::string& dataset_path);
int cmd_infer(const CommandContext& ctx, const std::string& dataset_path, const std::string& weights_path);
int cmd_sweep(const CommandContext& ctx, const std::string& dataset_path);
int cmd_saliency(const CommandContext& ctx, const std::string& in_dir);
int cmd_mackey(const CommandContext& ctx);
int cmd_stability(const CommandContext& ctx, double eta, double alpha, int traversals);
int cmd_fom(const CommandContext& ctx, const FomInputs& in);

// Regenerates with narrowed or widened impairment ranges until raw-linear
// accuracy lands inside [band_lo, band_hi].
struct CalibrationOptions {
  bool enabled = true;
  double band_lo = 0.55;
  double band_hi = 0.85;
  int max_rounds = 6;
  double eval_lambda = 1e-4;
};

SynthDatasetResult calibrated_gen_dataset(SynthSpec spec,
                                          const CorruptionSpec* corruption,
                                          const ExtractionParams& extraction,
                                          const CalibrationOptions& opts,
                                          std::vector<std::string>* log);

// Shared helpers for dataset-producing commands.
SynthSpec parse_synth_spec(const KvConfig& cfg);
std::optional<CorruptionSpec> parse_corruption(const KvConfig& cfg);
ExtractionParams parse_extraction(const KvConfig& cfg);
MackeyGlassSpec parse_mackey_spec(const KvConfig& cfg);

std::string format_confusion(const std::vector<int>& confusion, int num_classes);

}  // namespace dlr
