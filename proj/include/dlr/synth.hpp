#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlr/signal.hpp"

namespace dlr {

// Device-specific hardware impairments applied to an otherwise identical
// modulated payload. The odd-order amplifier polynomial a1*A + a3*A^3 +
// a5*A^5 must stay monotone on the working amplitude interval.
struct EmitterModel {
  int device_id = 0;
  double cfo_hz = 0.0;
  double iq_gain_imbalance_db = 0.0;
  double iq_phase_skew_rad = 0.0;
  double pa_a1 = 1.0;
  double pa_a3 = 0.0;
  double pa_a5 = 0.0;
  int ramp_samples = 0;
};

// Throws when the amplifier map is non-monotone on [0, amp_limit].
void validate_emitter(const EmitterModel& model, double amp_limit = 1.25);

struct ImpairmentRanges {
  double a1_lo = 0.9, a1_hi = 1.1;
  double cfo_hz = 25e3;        // +- range
  double imb_db = 1.0;         // +-
  double skew_rad = 0.05;      // +-
  double a3_lo = -0.10, a3_hi = -0.02;
  double a5_lo = -0.02, a5_hi = -0.004;
  int ramp_lo = 50, ramp_hi = 300;
  double min_separation = 0.08;  // normalized pairwise distance floor
};

enum class PayloadMode { FixedPreamble, RandomPayload };

struct SynthSpec {
  int num_devices = 20;
  int bursts_per_device = 500;
  PayloadMode payload = PayloadMode::FixedPreamble;
  uint64_t seed = 1;
  double sample_rate_hz = 100e6;
  int burst_len = 1024;

  ImpairmentRanges ranges;

  // capture embedding
  double noise_floor_amplitude = 0.01;
  int gap_min = 2000, gap_max = 4000;

  // per-burst nuisance magnitudes (intra-class variation)
  double timing_jitter_samples = 1.5;
  double level_jitter_db = 0.3;

  void validate() const;
};

struct ExtractionParams {
  int k = 1024;
  int pre_roll = 500;
  int sub_start = 500;
  int sub_end = 756;
  BurstDetectParams detect;
};

struct Dataset {
  int length = 0;       // L
  int num_classes = 0;  // Q
  std::vector<Datapoint> points;
};

// Q pairwise-distinct models from seeded uniform draws; candidates closer
// than the separation floor are re-drawn.
std::vector<EmitterModel> gen_emitters(const SynthSpec& spec);

// Modulated burst (pulse-shaped QPSK at 8x oversampling) carried through
// the impairment chain: IQ imbalance, amplifier polynomial, CFO phasor,
// power-on ramp. All randomness derives from payload_seed; symbol_seed
// overrides the symbol stream (fixed-preamble mode).
Burst synth_burst(const EmitterModel& model, uint64_t payload_seed, int length,
                  std::optional<uint64_t> symbol_seed = std::nullopt,
                  double sample_rate_hz = 100e6,
                  double timing_jitter_samples = 1.5,
                  double level_jitter_db = 0.3);

// The clean waveform before any impairment stage (payload + per-burst
// timing/phase/level nuisances only).
Burst synth_clean_waveform(uint64_t payload_seed, int length,
                           double timing_jitter_samples, double level_jitter_db,
                           std::optional<uint64_t> symbol_seed = std::nullopt);

struct SynthDatasetResult {
  Dataset dataset;
  std::vector<IqCapture> captures;  // one per device
  std::vector<EmitterModel> emitters;
  std::vector<std::string> notes;   // per-burst extraction failures etc.
};

// Embeds bursts into per-device noise-floor captures, then runs the burst
// pipeline (detect, extract, optional corruption, sub-burst, magnitude)
// to produce the labeled dataset.
SynthDatasetResult gen_dataset(const SynthSpec& spec,
                               const CorruptionSpec* corruption = nullptr,
                               const ExtractionParams& extraction = {});

struct MackeyGlassSpec {
  double beta = 0.2;
  double gamma = 0.1;
  double exponent = 10.0;
  double delay_tau = 17.0;
  double step = 0.1;
  int length = 2000;
  uint64_t seed = 0;        // reserved; the integration is deterministic
  int transient_steps = 1000;
};

// dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t), fixed-step RK4
// with constant history 1.2; half-step delayed values come from cubic
// Hermite interpolation of the stored trajectory. Returns the
// post-transient series.
std::vector<double> gen_mackey_glass(const MackeyGlassSpec& spec);

}  // namespace dlr
