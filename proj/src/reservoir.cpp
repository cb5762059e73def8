#include "dlr/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "dlr/error.hpp"

namespace dlr {

namespace {

inline double apply_nl(Nonlinearity nl, double u) {
  if (nl == Nonlinearity::SinSquared) {
    double s = std::sin(u);
    return s * s;
  }
  return std::tanh(u);
}

void check_finite(const std::vector<double>& datapoint) {
  for (double v : datapoint) {
    if (!std::isfinite(v)) throw InputError("non-finite input sample");
  }
}

}  // namespace

void ReservoirConfig::validate() const {
  if (n_nodes < 1) throw InputError("n_nodes must be >= 1");
  if (filter_taps < 1) throw InputError("filter_taps must be >= 1");
  if (filter_taps > n_nodes) throw InputError("filter_taps must be <= n_nodes");
  if (filter_time_constant <= 0.0)
    throw InputError("filter_time_constant must be > 0");
  if (layers != 1 && layers != 2) throw InputError("layers must be 1 or 2");
  if (layers == 2 && layer2_n_nodes < 1)
    throw InputError("layer2_n_nodes must be >= 1");
  if (layers == 2 && filter_taps > layer2_n_nodes)
    throw InputError("filter_taps must be <= layer2_n_nodes");
}

SpreadMask make_mask(int n_nodes, uint64_t seed) {
  if (n_nodes < 1) throw InputError("n_nodes must be >= 1");
  SpreadMask mask;
  mask.seed = seed;
  mask.chips.resize(static_cast<size_t>(n_nodes));
  CounterRng rng = CounterRng(seed).derive("mask");
  for (double& c : mask.chips) c = rng.open_symmetric();
  return mask;
}

FilterKernel make_filter(int taps, double time_constant) {
  if (taps < 1) throw InputError("filter taps must be >= 1");
  if (time_constant <= 0.0) throw InputError("filter time constant must be > 0");
  FilterKernel k;
  k.taps.resize(static_cast<size_t>(taps));
  double sum = 0.0;
  for (int j = 0; j < taps; ++j) {
    k.taps[j] = std::exp(-static_cast<double>(j) / time_constant);
    sum += k.taps[j];
  }
  for (double& t : k.taps) t /= sum;
  return k;
}

ReservoirState run_loop(const std::vector<double>& datapoint,
                        const ReservoirConfig& config, const SpreadMask& mask,
                        const FilterKernel& filter,
                        std::vector<double>* trace) {
  const size_t n = static_cast<size_t>(config.n_nodes);
  if (mask.chips.size() != n)
    throw InputError("mask length does not match n_nodes");
  if (datapoint.empty()) throw InputError("empty datapoint");
  check_finite(datapoint);

  const size_t f = filter.taps.size();
  const double nu = config.input_gain;
  const double eta = config.feedback_gain;

  std::vector<double> x(n, 0.0);    // previous-pass node values, cold start
  std::vector<double> aring(f, 0.0);
  if (trace) trace->assign(datapoint.size() * n, 0.0);

  size_t t = 0;  // 0-based global chip counter
  for (double s : datapoint) {
    for (size_t i = 0; i < n; ++i, ++t) {
      const double xp = x[i];  // x(t - N)
      const double a = apply_nl(config.nonlinearity,
                                eta * xp + nu * s * mask.chips[i]);
      aring[t % f] = a;
      double acc = 0.0;
      const size_t jmax = std::min(f - 1, t);
      for (size_t j = 0; j <= jmax; ++j) acc += filter.taps[j] * aring[(t - j) % f];
      if (config.accumulate_prior_state) acc += xp;
      x[i] = acc;
      if (trace) (*trace)[t] = acc;
    }
  }
  return ReservoirState{std::move(x)};
}

ReservoirState run_chip_sequence(const std::vector<double>& chips,
                                 int n_nodes, const ReservoirConfig& config,
                                 const SpreadMask& mask,
                                 const FilterKernel& filter) {
  const size_t n = static_cast<size_t>(n_nodes);
  if (mask.chips.size() != n)
    throw InputError("mask length does not match n_nodes");
  if (chips.empty()) throw InputError("empty chip sequence");

  const size_t f = filter.taps.size();
  const double nu = config.input_gain;
  const double eta = config.feedback_gain;

  std::vector<double> x(n, 0.0);
  std::vector<double> aring(f, 0.0);

  for (size_t t = 0; t < chips.size(); ++t) {
    const size_t i = t % n;
    const double xp = x[i];
    const double a = apply_nl(config.nonlinearity,
                              eta * xp + nu * chips[t] * mask.chips[i]);
    aring[t % f] = a;
    double acc = 0.0;
    const size_t jmax = std::min(f - 1, t);
    for (size_t j = 0; j <= jmax; ++j) acc += filter.taps[j] * aring[(t - j) % f];
    if (config.accumulate_prior_state) acc += xp;
    x[i] = acc;
  }
  return ReservoirState{std::move(x)};
}

ReservoirState run_split_loop(const std::vector<double>& datapoint,
                              const ReservoirConfig& config,
                              const SpreadMask& mask,
                              const FilterKernel& filter) {
  if (datapoint.size() < 2) throw InputError("split loop needs at least 2 samples");
  const size_t first_len = (datapoint.size() + 1) / 2;  // odd L: first half longer
  std::vector<double> first(datapoint.begin(),
                            datapoint.begin() + static_cast<ptrdiff_t>(first_len));
  std::vector<double> second(datapoint.begin() + static_cast<ptrdiff_t>(first_len),
                             datapoint.end());
  ReservoirState a = run_loop(first, config, mask, filter);
  ReservoirState b = run_loop(second, config, mask, filter);
  for (size_t i = 0; i < a.values.size(); ++i) {
    a.values[i] = 0.5 * (a.values[i] + b.values[i]);
  }
  return a;
}

namespace {

// layer-1 chip stream shifted by one chip, then run through the second loop
ReservoirState stack_second_layer(const std::vector<double>& layer1_trace,
                                  const ReservoirConfig& config,
                                  const SpreadMask& mask_layer2,
                                  const FilterKernel& filter) {
  std::vector<double> delayed(layer1_trace.size(), 0.0);
  std::copy(layer1_trace.begin(), layer1_trace.end() - 1, delayed.begin() + 1);
  return run_chip_sequence(delayed, config.layer2_n_nodes, config, mask_layer2,
                           filter);
}

}  // namespace

ReservoirState run_stacked_loops(const std::vector<double>& datapoint,
                                 const ReservoirConfig& config,
                                 const SpreadMask& mask_layer1,
                                 const SpreadMask& mask_layer2,
                                 const FilterKernel& filter) {
  if (config.layers != 2) throw InputError("run_stacked_loops requires layers=2");
  if (static_cast<int>(mask_layer2.chips.size()) != config.layer2_n_nodes)
    throw InputError("layer-2 mask length does not match layer2_n_nodes");

  if (!config.split) {
    std::vector<double> trace;
    run_loop(datapoint, config, mask_layer1, filter, &trace);
    return stack_second_layer(trace, config, mask_layer2, filter);
  }

  if (datapoint.size() < 2) throw InputError("split loop needs at least 2 samples");
  const size_t first_len = (datapoint.size() + 1) / 2;
  std::vector<double> first(datapoint.begin(),
                            datapoint.begin() + static_cast<ptrdiff_t>(first_len));
  std::vector<double> second(datapoint.begin() + static_cast<ptrdiff_t>(first_len),
                             datapoint.end());
  std::vector<double> trace;
  run_loop(first, config, mask_layer1, filter, &trace);
  ReservoirState a = stack_second_layer(trace, config, mask_layer2, filter);
  run_loop(second, config, mask_layer1, filter, &trace);
  ReservoirState b = stack_second_layer(trace, config, mask_layer2, filter);
  for (size_t i = 0; i < a.values.size(); ++i) {
    a.values[i] = 0.5 * (a.values[i] + b.values[i]);
  }
  return a;
}

LoopMasks make_loop_masks(const ReservoirConfig& config) {
  LoopMasks masks;
  CounterRng base(config.seed);
  masks.layer1 = make_mask(config.n_nodes, base.derive("mask-layer1").key());
  if (config.layers == 2) {
    masks.layer2 = make_mask(config.layer2_n_nodes, base.derive("mask-layer2").key());
  }
  return masks;
}

ReservoirState run_datapoint(const std::vector<double>& datapoint,
                             const ReservoirConfig& config,
                             const LoopMasks& masks,
                             const FilterKernel& filter) {
  if (config.layers == 2) {
    return run_stacked_loops(datapoint, config, masks.layer1, masks.layer2,
                             filter);
  }
  if (config.split) {
    return run_split_loop(datapoint, config, masks.layer1, filter);
  }
  return run_loop(datapoint, config, masks.layer1, filter);
}

}  // namespace dlr
