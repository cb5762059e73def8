#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dlr {

using Burst = std::vector<std::complex<float>>;

struct IqCapture {
  Burst samples;
  double sample_rate_hz = 100e6;
  double center_freq_hz = 0.0;
};

// One training/inference unit: L real magnitudes plus an optional label.
struct Datapoint {
  std::vector<double> values;
  int label = -1;  // < 0: unlabeled
  std::string provenance;
};

struct CorruptionSpec {
  double jitter_max_hz = 50e3;
  double snr_db_min = 20.0;  // +inf in both disables the noise stage
  double snr_db_max = 30.0;
  uint64_t seed = 1;
};

struct BurstDetectParams {
  int window = 64;              // moving-average length, samples
  double threshold_factor = 4;  // edge fires above factor * noise floor
  int floor_window = 4096;      // trailing median window for the floor
  int merge_radius = 1024;      // edges closer than this keep the first
};

// Rising-edge indices from moving-average power against a trailing
// noise-floor median. An edge re-arms only after power falls back under
// the threshold.
std::vector<size_t> detect_bursts(const IqCapture& capture,
                                  const BurstDetectParams& params = {});

// Samples [edge - pre_roll, edge - pre_roll + k); throws when the window
// falls outside the capture.
Burst extract_datapoint(const IqCapture& capture, size_t edge, int k = 1024,
                        int pre_roll = 500);

Burst sub_burst(const Burst& burst, size_t start, size_t end);

Datapoint magnitude(const Burst& burst);

// Divides by the largest sample; returns false and leaves the datapoint
// unchanged when it is all-zero.
bool normalize(Datapoint& datapoint);

// Global mode: one divisor (max over every datapoint) applied to all.
// Returns false when every datapoint is zero.
bool normalize_global(std::vector<Datapoint>& datapoints);

// Per-burst carrier jitter then additive circular white noise at an SNR
// drawn uniformly in dB. burst_index forks the per-burst random stream.
Burst corrupt(const Burst& burst, const CorruptionSpec& spec,
              double sample_rate_hz, uint64_t burst_index = 0);

// Accuracy of a quick train/eval pipeline over labeled datapoints.
using TrainEvalFn =
    std::function<double(const std::vector<Datapoint>& datapoints, int num_classes)>;

struct SaliencyCell {
  int start = 0;
  int end = 0;
  double accuracy = 0.0;
};

struct SaliencyMap {
  std::vector<SaliencyCell> cells;
  SaliencyCell best;  // ties: smaller window, then smaller start
};

// Sweeps sub-burst (start, end) over a grid_step lattice and records the
// accuracy the supplied pipeline reaches on each slice.
SaliencyMap saliency_sweep(const std::vector<Burst>& bursts,
                           const std::vector<int>& labels, int grid_step,
                           const TrainEvalFn& train_fn, int min_window = 64);

}  // namespace dlr
