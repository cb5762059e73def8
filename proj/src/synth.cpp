#include "dlr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlr/error.hpp"
#include "dlr/rng.hpp"

namespace dlr {

namespace {

constexpr int kOversample = 8;       // samples per symbol
constexpr double kRolloff = 0.35;    // raised-cosine excess bandwidth
constexpr int kPulseSpanSymbols = 8;

// raised-cosine impulse, symbol-time argument
double rc_pulse(double tau) {
  if (std::abs(tau) > kPulseSpanSymbols / 2.0) return 0.0;
  const double pi = std::numbers::pi;
  double sinc = 1.0;
  if (tau != 0.0) sinc = std::sin(pi * tau) / (pi * tau);
  const double d = 1.0 - (2.0 * kRolloff * tau) * (2.0 * kRolloff * tau);
  if (std::abs(d) < 1e-8) return sinc * pi / 4.0;
  return sinc * std::cos(pi * kRolloff * tau) / d;
}

}  // namespace

void validate_emitter(const EmitterModel& model, double amp_limit) {
  if (model.pa_a1 <= 0.0) throw InputError("amplifier a1 must be > 0");
  if (model.ramp_samples < 0) throw InputError("ramp_samples must be >= 0");
  // derivative a1 + 3 a3 A^2 + 5 a5 A^4 sampled over the working interval
  for (int i = 0; i <= 1000; ++i) {
    const double a = amp_limit * static_cast<double>(i) / 1000.0;
    const double d =
        model.pa_a1 + 3.0 * model.pa_a3 * a * a + 5.0 * model.pa_a5 * a * a * a * a;
    if (d <= 0.0) throw InputError("amplifier polynomial non-monotone on working interval");
  }
}

void SynthSpec::validate() const {
  if (num_devices < 2) throw InputError("num_devices must be >= 2");
  if (bursts_per_device < 1) throw InputError("bursts_per_device must be >= 1");
  if (sample_rate_hz <= 0.0) throw InputError("sample_rate_hz must be > 0");
  if (burst_len < 1) throw InputError("burst_len must be >= 1");
  if (gap_min < 600 || gap_max < gap_min)
    throw InputError("gaps must satisfy 600 <= gap_min <= gap_max");
}

std::vector<EmitterModel> gen_emitters(const SynthSpec& spec) {
  spec.validate();
  const ImpairmentRanges& rg = spec.ranges;
  CounterRng rng = CounterRng(spec.seed).derive("emitters");

  // distance in range-normalized parameter space; cfo is excluded because
  // it is invisible in the magnitude domain and cannot separate classes
  auto distance = [&rg](const EmitterModel& a, const EmitterModel& b) {
    auto norm = [](double d, double range) { return range > 0 ? d / range : 0.0; };
    const double d[6] = {
        norm(a.pa_a1 - b.pa_a1, rg.a1_hi - rg.a1_lo),
        norm(a.iq_gain_imbalance_db - b.iq_gain_imbalance_db, 2 * rg.imb_db),
        norm(a.iq_phase_skew_rad - b.iq_phase_skew_rad, 2 * rg.skew_rad),
        norm(a.pa_a3 - b.pa_a3, rg.a3_hi - rg.a3_lo),
        norm(a.pa_a5 - b.pa_a5, rg.a5_hi - rg.a5_lo),
        norm(static_cast<double>(a.ramp_samples - b.ramp_samples),
             static_cast<double>(rg.ramp_hi - rg.ramp_lo)),
    };
    double s = 0.0;
    for (double v : d) s += v * v;
    return std::sqrt(s / 6.0);
  };

  std::vector<EmitterModel> models;
  const int max_attempts = 1000;
  for (int q = 0; q < spec.num_devices; ++q) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      EmitterModel m;
      m.device_id = q;
      m.pa_a1 = rng.uniform(rg.a1_lo, rg.a1_hi);
      m.cfo_hz = rng.uniform(-rg.cfo_hz, rg.cfo_hz);
      m.iq_gain_imbalance_db = rng.uniform(-rg.imb_db, rg.imb_db);
      m.iq_phase_skew_rad = rng.uniform(-rg.skew_rad, rg.skew_rad);
      m.pa_a3 = rng.uniform(rg.a3_lo, rg.a3_hi);
      m.pa_a5 = rng.uniform(rg.a5_lo, rg.a5_hi);
      m.ramp_samples =
          rg.ramp_lo + static_cast<int>(rng.below(
                           static_cast<uint64_t>(rg.ramp_hi - rg.ramp_lo + 1)));
      validate_emitter(m);
      bool ok = true;
      for (const auto& other : models) {
        if (distance(m, other) < rg.min_separation) {
          ok = false;
          break;
        }
      }
      if (ok) {
        models.push_back(m);
        placed = true;
      }
    }
    if (!placed) {
      throw InputError("separation floor unreachable at " +
                       std::to_string(spec.num_devices) + " devices; max achievable " +
                       std::to_string(models.size()));
    }
  }
  return models;
}

Burst synth_clean_waveform(uint64_t payload_seed, int length,
                           double timing_jitter_samples, double level_jitter_db,
                           std::optional<uint64_t> symbol_seed) {
  if (length < 1) throw InputError("burst length must be >= 1");
  CounterRng rng(payload_seed);
  CounterRng sym_rng =
      symbol_seed ? CounterRng(*symbol_seed).derive("symbols") : rng.derive("symbols");

  const double delta = rng.derive("timing").uniform(0.0, timing_jitter_samples);
  const double phi0 =
      rng.derive("phase").uniform(0.0, 2.0 * std::numbers::pi);
  const double level =
      std::pow(10.0, rng.derive("level").uniform(-level_jitter_db, level_jitter_db) / 20.0);

  const int nsym = length / kOversample + kPulseSpanSymbols + 2;
  std::vector<std::complex<double>> syms(static_cast<size_t>(nsym));
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (auto& s : syms) {
    const uint64_t bits = sym_rng.next_u64();
    s = {(bits & 1) ? inv_sqrt2 : -inv_sqrt2,
         (bits & 2) ? inv_sqrt2 : -inv_sqrt2};
  }

  const std::complex<double> carrier(level * std::cos(phi0), level * std::sin(phi0));
  Burst out(static_cast<size_t>(length));
  for (int t = 0; t < length; ++t) {
    const double tau0 = (static_cast<double>(t) - delta) / kOversample;
    const int k0 = static_cast<int>(std::floor(tau0));
    std::complex<double> acc(0.0, 0.0);
    for (int k = std::max(0, k0 - kPulseSpanSymbols / 2);
         k <= std::min(nsym - 1, k0 + kPulseSpanSymbols / 2 + 1); ++k) {
      acc += syms[static_cast<size_t>(k)] * rc_pulse(tau0 - k);
    }
    acc *= carrier;
    out[static_cast<size_t>(t)] = std::complex<float>(
        static_cast<float>(acc.real()), static_cast<float>(acc.imag()));
  }
  return out;
}

Burst synth_burst(const EmitterModel& model, uint64_t payload_seed, int length,
                  std::optional<uint64_t> symbol_seed, double sample_rate_hz,
                  double timing_jitter_samples, double level_jitter_db) {
  if (length < model.ramp_samples)
    throw InputError("burst shorter than power-on ramp");
  validate_emitter(model);
  Burst burst = synth_clean_waveform(payload_seed, length, timing_jitter_samples,
                                     level_jitter_db, symbol_seed);

  const double g_imb = std::pow(10.0, model.iq_gain_imbalance_db / 20.0);
  const double cs = std::cos(model.iq_phase_skew_rad);
  const double sn = std::sin(model.iq_phase_skew_rad);
  const double omega =
      2.0 * std::numbers::pi * model.cfo_hz / sample_rate_hz;

  for (size_t t = 0; t < burst.size(); ++t) {
    double i = burst[t].real();
    double q = burst[t].imag();
    // transmit-side IQ imbalance: gain and phase skew on the Q rail
    q = g_imb * (q * cs + i * sn);
    // odd-order amplifier acting on instantaneous amplitude
    const double a2 = i * i + q * q;
    const double gain = model.pa_a1 + model.pa_a3 * a2 + model.pa_a5 * a2 * a2;
    i *= gain;
    q *= gain;
    // carrier frequency offset
    const double phase = omega * static_cast<double>(t);
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double ir = i * c - q * s;
    const double qr = i * s + q * c;
    i = ir;
    q = qr;
    // power-on envelope
    if (static_cast<int>(t) < model.ramp_samples) {
      const double r = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(t) /
                                             model.ramp_samples));
      i *= r;
      q *= r;
    }
    burst[t] = std::complex<float>(static_cast<float>(i), static_cast<float>(q));
  }
  return burst;
}

namespace {

struct DeviceCapture {
  IqCapture capture;
  std::vector<size_t> burst_offsets;
};

DeviceCapture build_device_capture(const SynthSpec& spec,
                                   const EmitterModel& model, int device) {
  CounterRng rng_d = CounterRng(spec.seed).derive("device").derive(
      static_cast<uint64_t>(device));
  CounterRng gap_rng = rng_d.derive("gaps");
  CounterRng floor_rng = rng_d.derive("floor");

  const uint64_t gap_span =
      static_cast<uint64_t>(spec.gap_max - spec.gap_min + 1);
  std::vector<size_t> gaps(static_cast<size_t>(spec.bursts_per_device) + 1);
  size_t total = 0;
  for (auto& g : gaps) {
    g = static_cast<size_t>(spec.gap_min) + gap_rng.below(gap_span);
    total += g;
  }
  total += static_cast<size_t>(spec.bursts_per_device) *
           static_cast<size_t>(spec.burst_len);

  DeviceCapture out;
  out.capture.sample_rate_hz = spec.sample_rate_hz;
  out.capture.samples.assign(total, {0.0f, 0.0f});

  const double floor_sigma = spec.noise_floor_amplitude / std::numbers::sqrt2;
  for (auto& z : out.capture.samples) {
    auto [ni, nq] = floor_rng.normal_pair();
    z = std::complex<float>(static_cast<float>(floor_sigma * ni),
                            static_cast<float>(floor_sigma * nq));
  }

  const std::optional<uint64_t> preamble_seed =
      spec.payload == PayloadMode::FixedPreamble
          ? std::optional<uint64_t>(CounterRng(spec.seed).derive("preamble").key())
          : std::nullopt;

  size_t pos = 0;
  for (int b = 0; b < spec.bursts_per_device; ++b) {
    pos += gaps[static_cast<size_t>(b)];
    const uint64_t payload_seed =
        rng_d.derive("payload").derive(static_cast<uint64_t>(b)).key();
    Burst burst = synth_burst(model, payload_seed, spec.burst_len, preamble_seed,
                              spec.sample_rate_hz, spec.timing_jitter_samples,
                              spec.level_jitter_db);
    for (size_t t = 0; t < burst.size(); ++t) {
      out.capture.samples[pos + t] += burst[t];
    }
    out.burst_offsets.push_back(pos);
    pos += burst.size();
  }
  return out;
}

}  // namespace

SynthDatasetResult gen_dataset(const SynthSpec& spec,
                               const CorruptionSpec* corruption,
                               const ExtractionParams& extraction) {
  spec.validate();
  if (extraction.sub_start >= extraction.sub_end ||
      extraction.sub_end > extraction.k)
    throw InputError("sub-burst range invalid for extraction k");

  SynthDatasetResult result;
  result.emitters = gen_emitters(spec);
  result.captures.resize(static_cast<size_t>(spec.num_devices));
  result.dataset.length = extraction.sub_end - extraction.sub_start;
  result.dataset.num_classes = spec.num_devices;

  std::vector<std::vector<Datapoint>> per_device(
      static_cast<size_t>(spec.num_devices));
  std::vector<std::vector<std::string>> per_device_notes(
      static_cast<size_t>(spec.num_devices));

#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < spec.num_devices; ++d) {
    DeviceCapture dc = build_device_capture(spec, result.emitters[d], d);
    std::vector<size_t> edges = detect_bursts(dc.capture, extraction.detect);
    auto& points = per_device[static_cast<size_t>(d)];
    auto& notes = per_device_notes[static_cast<size_t>(d)];
    if (edges.size() != dc.burst_offsets.size()) {
      notes.push_back("device " + std::to_string(d) + ": detected " +
                      std::to_string(edges.size()) + " bursts, planted " +
                      std::to_string(dc.burst_offsets.size()));
    }
    for (size_t e = 0; e < edges.size(); ++e) {
      try {
        Burst burst =
            extract_datapoint(dc.capture, edges[e], extraction.k, extraction.pre_roll);
        if (corruption) {
          const uint64_t burst_index =
              static_cast<uint64_t>(d) *
                  static_cast<uint64_t>(spec.bursts_per_device) +
              e;
          burst = corrupt(burst, *corruption, spec.sample_rate_hz, burst_index);
        }
        Datapoint dp = magnitude(
            sub_burst(burst, static_cast<size_t>(extraction.sub_start),
                      static_cast<size_t>(extraction.sub_end)));
        dp.label = d;
        dp.provenance = "capture_" + std::to_string(d) + "+" +
                        std::to_string(edges[e]);
        points.push_back(std::move(dp));
      } catch (const InputError& err) {
        notes.push_back("device " + std::to_string(d) + " edge " +
                        std::to_string(edges[e]) + ": " + err.what());
      }
    }
    result.captures[static_cast<size_t>(d)] = std::move(dc.capture);
  }

  for (int d = 0; d < spec.num_devices; ++d) {
    auto& pts = per_device[static_cast<size_t>(d)];
    std::move(pts.begin(), pts.end(), std::back_inserter(result.dataset.points));
    auto& nts = per_device_notes[static_cast<size_t>(d)];
    std::move(nts.begin(), nts.end(), std::back_inserter(result.notes));
  }
  return result;
}

std::vector<double> gen_mackey_glass(const MackeyGlassSpec& spec) {
  if (spec.length == 0) return {};
  if (spec.length < 0) throw InputError("length must be >= 0");
  if (spec.beta < 0 || spec.gamma <= 0 || spec.exponent <= 0 ||
      spec.delay_tau <= 0 || spec.step <= 0)
    throw InputError("mackey-glass parameters must be positive");
  const double ratio = spec.delay_tau / spec.step;
  const int delay = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - delay) > 1e-9 || delay < 1)
    throw InputError("delay_tau must be an integer multiple of step");

  const int total = spec.transient_steps + spec.length;
  const double h = spec.step;

  // grid values and derivatives; index i corresponds to t = i*h, history
  // occupies indices [0, delay] with x = 1.2 and derivative 0
  std::vector<double> x(static_cast<size_t>(total + delay + 1), 1.2);
  std::vector<double> dx(static_cast<size_t>(total + delay + 1), 0.0);

  auto f = [&spec](double xv, double xd) {
    return spec.beta * xd / (1.0 + std::pow(xd, spec.exponent)) -
           spec.gamma * xv;
  };
  // cubic Hermite at the midpoint of [i, i+1]
  auto mid = [&](int i) {
    const double x0 = x[static_cast<size_t>(i)];
    const double x1 = x[static_cast<size_t>(i + 1)];
    const double d0 = dx[static_cast<size_t>(i)];
    const double d1 = dx[static_cast<size_t>(i + 1)];
    return 0.5 * (x0 + x1) + 0.125 * h * (d0 - d1);
  };

  for (int i = delay; i < total + delay; ++i) {
    const double xi = x[static_cast<size_t>(i)];
    const double xd0 = x[static_cast<size_t>(i - delay)];
    const double xd_half = mid(i - delay);
    const double xd1 = x[static_cast<size_t>(i - delay + 1)];
    const double k1 = f(xi, xd0);
    const double k2 = f(xi + 0.5 * h * k1, xd_half);
    const double k3 = f(xi + 0.5 * h * k2, xd_half);
    const double k4 = f(xi + h * k3, xd1);
    x[static_cast<size_t>(i + 1)] = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    dx[static_cast<size_t>(i + 1)] =
        f(x[static_cast<size_t>(i + 1)], xd1);
  }

  std::vector<double> out(
      x.begin() + static_cast<ptrdiff_t>(delay + spec.transient_steps + 1),
      x.end());
  return out;
}

}  // namespace dlr
