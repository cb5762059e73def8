#pragma once

#include <cstdint>
#include <vector>

#include "dlr/rng.hpp"

namespace dlr {

enum class Nonlinearity { SinSquared, Tanh };

// All loop hyperparameters. Immutable after construction and safe to share
// between concurrent datapoint runs.
struct ReservoirConfig {
  int n_nodes = 600;                  // N, virtual nodes per loop
  double input_gain = 0.5;            // nu
  double feedback_gain = 0.5;         // eta
  Nonlinearity nonlinearity = Nonlinearity::SinSquared;
  int filter_taps = 5;                // F, truncation length in chips
  double filter_time_constant = 1.0;  // T, in chips
  bool accumulate_prior_state = false;
  bool split = false;
  int layers = 1;
  int layer2_n_nodes = 600;
  uint64_t seed = 1;

  void validate() const;  // throws InputError on domain violations
};

// Fixed random chip sequence m, one chip per virtual node, each in (-1, 1).
struct SpreadMask {
  std::vector<double> chips;
  uint64_t seed = 0;
};

// Causal decay kernel h, non-negative and non-increasing, sums to 1.
struct FilterKernel {
  std::vector<double> taps;
};

struct ReservoirState {
  std::vector<double> values;
};

SpreadMask make_mask(int n_nodes, uint64_t seed);

// h_j proportional to exp(-j / T), j = 0..F-1, rescaled to unit sum.
FilterKernel make_filter(int taps, double time_constant);

// Streaming emulation of one loop pass over a datapoint.
//
// Chip time t = (n-1)*N + i for sample n = 1..L and node i = 1..N:
//   J(t) = s_n * m_i
//   a(t) = f_NL(eta * x(t-N) + nu * J(t)),   x(u<=0) = 0
//   x(t) = sum_j h_j * a(t-j),               a(u<=0) = 0
// accumulate_prior_state additionally adds x(t-N) into x(t).
// Returns the node values after the final sample. When `trace` is non-null
// it receives the full chip stream x(1)..x(L*N).
ReservoirState run_loop(const std::vector<double>& datapoint,
                        const ReservoirConfig& config, const SpreadMask& mask,
                        const FilterKernel& filter,
                        std::vector<double>* trace = nullptr);

// Same recurrence, but the input already arrives at chip rate: chip t is
// multiplied by mask chip ((t-1) mod N)+1 and the feedback delay is N chips.
ReservoirState run_chip_sequence(const std::vector<double>& chips,
                                 int n_nodes, const ReservoirConfig& config,
                                 const SpreadMask& mask,
                                 const FilterKernel& filter);

// Runs each half of the datapoint through its own loop (same mask and
// config) and returns the element-wise mean of the two final states.
// Odd lengths give the extra sample to the first half.
ReservoirState run_split_loop(const std::vector<double>& datapoint,
                              const ReservoirConfig& config,
                              const SpreadMask& mask,
                              const FilterKernel& filter);

// Two stacked loops: layer 2 consumes the layer-1 state stream delayed by
// one chip, with its own mask applied per-chip and the same filter. With
// split=true each half-loop of layer 1 feeds the matching half-loop of
// layer 2. Returns the layer-2 final state.
ReservoirState run_stacked_loops(const std::vector<double>& datapoint,
                                 const ReservoirConfig& config,
                                 const SpreadMask& mask_layer1,
                                 const SpreadMask& mask_layer2,
                                 const FilterKernel& filter);

// Dispatches on config.split / config.layers.
struct LoopMasks {
  SpreadMask layer1;
  SpreadMask layer2;
};

LoopMasks make_loop_masks(const ReservoirConfig& config);

ReservoirState run_datapoint(const std::vector<double>& datapoint,
                             const ReservoirConfig& config,
                             const LoopMasks& masks,
                             const FilterKernel& filter);

}  // namespace dlr
