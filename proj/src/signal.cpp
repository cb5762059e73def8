#include "dlr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "dlr/error.hpp"
#include "dlr/rng.hpp"

namespace dlr {

namespace {

constexpr int kFloorRefreshStride = 256;

double median_of(std::vector<double>& scratch) {
  const size_t mid = scratch.size() / 2;
  std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
  return scratch[mid];
}

}  // namespace

std::vector<size_t> detect_bursts(const IqCapture& capture,
                                  const BurstDetectParams& params) {
  if (capture.samples.empty()) throw InputError("empty capture");
  if (params.window < 1) throw InputError("window must be >= 1");
  if (params.threshold_factor <= 1.0)
    throw InputError("threshold_factor must be > 1");

  const size_t len = capture.samples.size();
  const size_t w = static_cast<size_t>(params.window);

  // moving-average power over the trailing window
  std::vector<double> power(len, 0.0);
  double acc = 0.0;
  for (size_t t = 0; t < len; ++t) {
    const auto& z = capture.samples[t];
    acc += double(z.real()) * z.real() + double(z.imag()) * z.imag();
    if (t >= w) {
      const auto& old = capture.samples[t - w];
      acc -= double(old.real()) * old.real() + double(old.imag()) * old.imag();
    }
    power[t] = acc / static_cast<double>(std::min(t + 1, w));
  }

  std::vector<size_t> edges;
  std::vector<double> scratch;
  double floor_est = 0.0;
  bool armed = true;
  size_t last_edge = 0;
  bool have_edge = false;

  for (size_t t = w; t < len; ++t) {
    // trailing-median noise floor, refreshed every few hundred samples
    if ((t - w) % kFloorRefreshStride == 0 || t == w) {
      const size_t lo = t > static_cast<size_t>(params.floor_window)
                            ? t - static_cast<size_t>(params.floor_window)
                            : size_t{0};
      scratch.assign(power.begin() + static_cast<ptrdiff_t>(lo),
                     power.begin() + static_cast<ptrdiff_t>(t));
      floor_est = median_of(scratch);
    }
    const double threshold = params.threshold_factor * floor_est;
    if (power[t] > threshold) {
      if (armed) {
        armed = false;
        if (!have_edge ||
            t >= last_edge + static_cast<size_t>(params.merge_radius)) {
          edges.push_back(t);
          last_edge = t;
          have_edge = true;
        }
      }
    } else {
      armed = true;
    }
  }
  return edges;
}

Burst extract_datapoint(const IqCapture& capture, size_t edge, int k,
                        int pre_roll) {
  if (k < 1) throw InputError("k must be >= 1");
  if (pre_roll < 0) throw InputError("pre_roll must be >= 0");
  if (edge < static_cast<size_t>(pre_roll))
    throw InputError("insufficient history before edge");
  const size_t start = edge - static_cast<size_t>(pre_roll);
  if (start + static_cast<size_t>(k) > capture.samples.size())
    throw InputError("extraction window past end of capture");
  return Burst(capture.samples.begin() + static_cast<ptrdiff_t>(start),
               capture.samples.begin() + static_cast<ptrdiff_t>(start + k));
}

Burst sub_burst(const Burst& burst, size_t start, size_t end) {
  if (start >= end) throw InputError("sub-burst start must precede end");
  if (end > burst.size()) throw InputError("sub-burst end past burst length");
  return Burst(burst.begin() + static_cast<ptrdiff_t>(start),
               burst.begin() + static_cast<ptrdiff_t>(end));
}

Datapoint magnitude(const Burst& burst) {
  Datapoint dp;
  dp.values.reserve(burst.size());
  for (const auto& z : burst) {
    dp.values.push_back(std::hypot(double(z.real()), double(z.imag())));
  }
  return dp;
}

bool normalize(Datapoint& datapoint) {
  double mx = 0.0;
  for (double v : datapoint.values) mx = std::max(mx, v);
  if (mx == 0.0) return false;
  for (double& v : datapoint.values) v /= mx;
  return true;
}

bool normalize_global(std::vector<Datapoint>& datapoints) {
  double mx = 0.0;
  for (const auto& dp : datapoints) {
    for (double v : dp.values) mx = std::max(mx, v);
  }
  if (mx == 0.0) return false;
  for (auto& dp : datapoints) {
    for (double& v : dp.values) v /= mx;
  }
  return true;
}

Burst corrupt(const Burst& burst, const CorruptionSpec& spec,
              double sample_rate_hz, uint64_t burst_index) {
  if (spec.jitter_max_hz < 0.0) throw InputError("jitter_max_hz must be >= 0");
  if (spec.snr_db_min > spec.snr_db_max)
    throw InputError("snr_db_min must be <= snr_db_max");
  if (sample_rate_hz <= 0.0) throw InputError("sample_rate_hz must be > 0");

  CounterRng rng = CounterRng(spec.seed).derive("corrupt").derive(burst_index);
  const double df = rng.uniform(-spec.jitter_max_hz, spec.jitter_max_hz);
  // inf - inf would poison the uniform draw, so short-circuit noiseless mode
  const double snr_db = std::isinf(spec.snr_db_min)
                            ? spec.snr_db_min
                            : rng.uniform(spec.snr_db_min, spec.snr_db_max);

  Burst out(burst.size());
  double signal_power = 0.0;
  for (size_t t = 0; t < burst.size(); ++t) {
    const double phase =
        2.0 * std::numbers::pi * df * static_cast<double>(t) / sample_rate_hz;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double i = burst[t].real();
    const double q = burst[t].imag();
    out[t] = std::complex<float>(static_cast<float>(i * c - q * s),
                                 static_cast<float>(i * s + q * c));
    signal_power += i * i + q * q;
  }
  signal_power /= static_cast<double>(std::max<size_t>(burst.size(), 1));

  if (std::isinf(snr_db)) return out;  // noiseless mode

  const double noise_power = signal_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_power / 2.0);
  for (auto& z : out) {
    auto [ni, nq] = rng.normal_pair();
    z += std::complex<float>(static_cast<float>(sigma * ni),
                             static_cast<float>(sigma * nq));
  }
  return out;
}

SaliencyMap saliency_sweep(const std::vector<Burst>& bursts,
                           const std::vector<int>& labels, int grid_step,
                           const TrainEvalFn& train_fn, int min_window) {
  if (bursts.empty() || bursts.size() != labels.size())
    throw InputError("bursts and labels must align and be non-empty");
  if (grid_step < 1) throw InputError("grid_step must be >= 1");
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw InputError("saliency sweep needs >= 2 classes");
  const int num_classes = *classes.rbegin() + 1;

  const int k = static_cast<int>(bursts[0].size());
  SaliencyMap map;
  map.best.accuracy = -1.0;
  std::vector<Datapoint> dps(bursts.size());

  for (int start = 0; start + min_window <= k; start += grid_step) {
    for (int end = start + grid_step; end <= k; end += grid_step) {
      if (end - start < min_window) continue;
      for (size_t b = 0; b < bursts.size(); ++b) {
        dps[b] = magnitude(sub_burst(bursts[b], static_cast<size_t>(start),
                                     static_cast<size_t>(end)));
        dps[b].label = labels[b];
      }
      SaliencyCell cell{start, end, train_fn(dps, num_classes)};
      map.cells.push_back(cell);
      const int win = end - start;
      const int best_win = map.best.end - map.best.start;
      const bool better =
          cell.accuracy > map.best.accuracy ||
          (cell.accuracy == map.best.accuracy &&
           (win < best_win || (win == best_win && start < map.best.start)));
      if (better) map.best = cell;
    }
  }
  if (map.cells.empty()) throw InputError("grid produced no valid cells");
  return map;
}

}  // namespace dlr
