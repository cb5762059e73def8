#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dlr/error.hpp"
#include "dlr/synth.hpp"

#include "doctest.h"

using namespace dlr;

namespace {

EmitterModel transparent_emitter() {
  EmitterModel m;  // defaults are already the identity chain
  m.device_id = 0;
  return m;
}

// same normalized metric the generator promises to enforce; cfo does not
// count because magnitude features cannot see it
double emitter_distance(const EmitterModel& a, const EmitterModel& b,
                        const ImpairmentRanges& rg) {
  auto norm = [](double d, double range) { return range > 0 ? d / range : 0.0; };
  const double d[6] = {
      norm(a.pa_a1 - b.pa_a1, rg.a1_hi - rg.a1_lo),
      norm(a.iq_gain_imbalance_db - b.iq_gain_imbalance_db, 2 * rg.imb_db),
      norm(a.iq_phase_skew_rad - b.iq_phase_skew_rad, 2 * rg.skew_rad),
      norm(a.pa_a3 - b.pa_a3, rg.a3_hi - rg.a3_lo),
      norm(a.pa_a5 - b.pa_a5, rg.a5_hi - rg.a5_lo),
      norm((double)(a.ramp_samples - b.ramp_samples),
           (double)(rg.ramp_hi - rg.ramp_lo)),
  };
  double s = 0.0;
  for (double v : d) s += v * v;
  return std::sqrt(s / 6.0);
}

}  // namespace

TEST_CASE("validate_emitter rejects non-monotone amplifier maps") {
  EmitterModel m = transparent_emitter();
  CHECK_NOTHROW(validate_emitter(m));
  m.pa_a3 = -0.10;
  m.pa_a5 = -0.02;
  CHECK_NOTHROW(validate_emitter(m));  // the widest stock impairment
  m.pa_a3 = -0.5;
  CHECK_THROWS_AS(validate_emitter(m), InputError);
  m = transparent_emitter();
  m.pa_a1 = 0.0;
  CHECK_THROWS_AS(validate_emitter(m), InputError);
  m = transparent_emitter();
  m.ramp_samples = -1;
  CHECK_THROWS_AS(validate_emitter(m), InputError);
}

TEST_CASE("gen_emitters is deterministic and respects the separation floor") {
  SynthSpec spec;
  spec.num_devices = 20;
  spec.seed = 5;
  std::vector<EmitterModel> a = gen_emitters(spec);
  std::vector<EmitterModel> b = gen_emitters(spec);
  REQUIRE(a.size() == 20);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].device_id == (int)i);
    CHECK(a[i].pa_a1 == b[i].pa_a1);
    CHECK(a[i].cfo_hz == b[i].cfo_hz);
    CHECK(a[i].pa_a3 == b[i].pa_a3);
    CHECK(a[i].pa_a5 == b[i].pa_a5);
    CHECK(a[i].ramp_samples == b[i].ramp_samples);
    CHECK_NOTHROW(validate_emitter(a[i]));
  }
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = i + 1; j < a.size(); ++j)
      CHECK(emitter_distance(a[i], a[j], spec.ranges) >=
            spec.ranges.min_separation - 1e-12);

  spec.seed = 6;
  std::vector<EmitterModel> c = gen_emitters(spec);
  bool any_differ = false;
  for (size_t i = 0; i < c.size(); ++i)
    if (c[i].pa_a1 != a[i].pa_a1) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("an impossible separation floor reports the achievable count") {
  SynthSpec spec;
  spec.num_devices = 5;
  spec.ranges.min_separation = 10.0;  // normalized distances top out near 1
  try {
    gen_emitters(spec);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    std::string msg = e.what();
    CHECK(msg.find("max achievable") != std::string::npos);
  }
}

TEST_CASE("a transparent emitter leaves the clean waveform untouched") {
  Burst clean = synth_clean_waveform(42, 1024, 1.5, 0.3);
  Burst through = synth_burst(transparent_emitter(), 42, 1024);
  CHECK(through == clean);
}

TEST_CASE("pure carrier offset preserves sample magnitudes") {
  EmitterModel m = transparent_emitter();
  m.cfo_hz = 20e3;
  Burst clean = synth_clean_waveform(42, 1024, 1.5, 0.3);
  Burst out = synth_burst(m, 42, 1024);
  CHECK(out != clean);
  for (size_t t = 0; t < out.size(); ++t) {
    double mc = std::hypot((double)clean[t].real(), (double)clean[t].imag());
    double mo = std::hypot((double)out[t].real(), (double)out[t].imag());
    CHECK(std::fabs(mo - mc) <= 1e-6 * (1.0 + mc));
  }
}

TEST_CASE("a compressive amplifier never amplifies and bites at the peaks") {
  EmitterModel m = transparent_emitter();
  m.pa_a3 = -0.10;
  m.pa_a5 = -0.02;
  Burst clean = synth_clean_waveform(42, 1024, 1.5, 0.3);
  Burst out = synth_burst(m, 42, 1024);
  double peak_clean = 0.0, peak_out = 0.0;
  for (size_t t = 0; t < out.size(); ++t) {
    double mc = std::hypot((double)clean[t].real(), (double)clean[t].imag());
    double mo = std::hypot((double)out[t].real(), (double)out[t].imag());
    CHECK(mo <= mc * (1.0 + 1e-6) + 1e-9);
    peak_clean = std::max(peak_clean, mc);
    peak_out = std::max(peak_out, mo);
  }
  CHECK(peak_out < peak_clean * 0.99);
}

TEST_CASE("burst synthesis replays bitwise and forks across seeds") {
  EmitterModel m = transparent_emitter();
  m.pa_a3 = -0.05;
  m.ramp_samples = 100;
  Burst a = synth_burst(m, 7, 512);
  Burst b = synth_burst(m, 7, 512);
  CHECK(a == b);
  CHECK(synth_burst(m, 8, 512) != a);

  // a preamble seed pins the symbol stream independently of the payload seed
  Burst p1 = synth_burst(m, 7, 512, 99);
  Burst p2 = synth_burst(m, 7, 512, 100);
  CHECK(p1 != a);
  CHECK(p1 != p2);

  CHECK_THROWS_AS(synth_burst(m, 7, 99), InputError);  // shorter than the ramp
  CHECK_THROWS_AS(synth_clean_waveform(7, 0, 1.5, 0.3), InputError);
}

TEST_CASE("gen_dataset assembles a labeled magnitude dataset") {
  SynthSpec spec;
  spec.num_devices = 3;
  spec.bursts_per_device = 20;
  spec.seed = 11;
  SynthDatasetResult r = gen_dataset(spec);
  CHECK(r.emitters.size() == 3);
  CHECK(r.captures.size() == 3);
  CHECK(r.dataset.num_classes == 3);
  CHECK(r.dataset.length == 256);
  REQUIRE(r.dataset.points.size() == 60);
  CHECK(r.notes.empty());
  std::vector<int> counts(3, 0);
  for (const auto& dp : r.dataset.points) {
    REQUIRE(dp.label >= 0);
    REQUIRE(dp.label < 3);
    ++counts[(size_t)dp.label];
    REQUIRE(dp.values.size() == 256);
    for (double v : dp.values) REQUIRE(v >= 0.0);
    CHECK(dp.provenance.find("capture_") == 0);
  }
  CHECK(counts == std::vector<int>{20, 20, 20});

  SynthDatasetResult again = gen_dataset(spec);
  REQUIRE(again.dataset.points.size() == r.dataset.points.size());
  for (size_t i = 0; i < r.dataset.points.size(); ++i)
    CHECK(again.dataset.points[i].values == r.dataset.points[i].values);

  CorruptionSpec corr;  // stock jitter plus 20-30 dB noise
  SynthDatasetResult noisy = gen_dataset(spec, &corr);
  REQUIRE(noisy.dataset.points.size() == r.dataset.points.size());
  bool differs = false;
  for (size_t i = 0; i < r.dataset.points.size() && !differs; ++i)
    differs = noisy.dataset.points[i].values != r.dataset.points[i].values;
  CHECK(differs);
}

TEST_CASE("gen_dataset validates the extraction range") {
  SynthSpec spec;
  spec.num_devices = 2;
  spec.bursts_per_device = 2;
  ExtractionParams ex;
  ex.sub_start = 800;
  ex.sub_end = 700;
  CHECK_THROWS_AS(gen_dataset(spec, nullptr, ex), InputError);
  ex.sub_start = 500;
  ex.sub_end = 2000;  // past k
  CHECK_THROWS_AS(gen_dataset(spec, nullptr, ex), InputError);
  spec.num_devices = 1;
  CHECK_THROWS_AS(gen_dataset(spec), InputError);
}

TEST_CASE("mackey-glass with no feedback decays exponentially") {
  MackeyGlassSpec spec;
  spec.beta = 0.0;
  spec.transient_steps = 0;
  spec.length = 50;
  std::vector<double> x = gen_mackey_glass(spec);
  REQUIRE(x.size() == 50);
  for (size_t i = 0; i < x.size(); ++i) {
    double t = spec.step * (double)(i + 1);
    CHECK(x[i] == doctest::Approx(1.2 * std::exp(-spec.gamma * t)).epsilon(1e-9));
  }
}

TEST_CASE("canonical mackey-glass stays on the attractor") {
  MackeyGlassSpec spec;  // tau 17, the classic chaotic regime
  std::vector<double> x = gen_mackey_glass(spec);
  REQUIRE(x.size() == 2000);
  double lo = x[0], hi = x[0];
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.5);
  CHECK(hi - lo > 0.3);  // genuinely oscillating, not settled
}

TEST_CASE("mackey-glass step halving converges") {
  MackeyGlassSpec coarse;
  coarse.transient_steps = 0;
  coarse.length = 100;
  coarse.step = 0.1;
  MackeyGlassSpec fine = coarse;
  fine.step = 0.05;
  fine.length = 200;
  std::vector<double> xc = gen_mackey_glass(coarse);
  std::vector<double> xf = gen_mackey_glass(fine);
  for (size_t i = 0; i < xc.size(); ++i)
    CHECK(xc[i] == doctest::Approx(xf[2 * i + 1]).epsilon(1e-4));
}

TEST_CASE("mackey-glass input validation") {
  MackeyGlassSpec spec;
  spec.length = 0;
  CHECK(gen_mackey_glass(spec).empty());
  spec.length = -5;
  CHECK_THROWS_AS(gen_mackey_glass(spec), InputError);
  spec = MackeyGlassSpec{};
  spec.step = 0.3;  // 17 / 0.3 is not an integer
  CHECK_THROWS_AS(gen_mackey_glass(spec), InputError);
  spec = MackeyGlassSpec{};
  spec.gamma = 0.0;
  CHECK_THROWS_AS(gen_mackey_glass(spec), InputError);
}
