#include "dlr/analysis.hpp"

#include <cmath>

#include "dlr/error.hpp"

namespace dlr {

GainResult loop_gain(const StabilityParams& params) {
  if (params.traversals < 1) throw InputError("traversals must be >= 1");
  if (params.one_pass_gain < 0.0) throw InputError("gain must be >= 0");
  GainResult r;
  r.gain = std::pow(params.one_pass_gain, static_cast<double>(params.traversals));
  r.stable = r.gain < 1.0;
  return r;
}

GainResult average_gain(double alpha, int traversals) {
  if (traversals < 1) throw InputError("traversals must be >= 1");
  if (alpha < 0.0) throw InputError("alpha must be >= 0");
  const double k = static_cast<double>(traversals);
  GainResult r;
  if (alpha == 1.0) {
    r.gain = k / (k + 1.0);
  } else if (alpha == 0.0) {
    r.gain = 0.0;
  } else {
    // sum_{j=1..K} a^j = a (1 - a^K) / (1 - a); 1 - a^K via expm1 to keep
    // precision when alpha is within ulps of 1
    const double one_minus_ak = -std::expm1(k * std::log(alpha));
    r.gain = alpha * one_minus_ak / (1.0 - alpha) / (k + 1.0);
  }
  r.stable = r.gain < 1.0;
  return r;
}

FomReport compute_foms(const FomInputs& in) {
  if (in.q <= 0 || in.n <= 0 || in.b <= 0)
    throw InputError("q, n, b must be positive");
  FomReport r;
  r.inputs = in;
  r.m_dlr = in.q * in.n;
  r.c_dlr_train = in.b * in.n * in.n;
  r.c_dlr_infer = in.q * in.n * in.n;
  r.srf = in.m_rnn / r.m_dlr;
  r.hcrf = in.c_rnn / r.c_dlr_train;
  if (in.delta_rnn > 0.0) {
    const LatencyReport lat = latency_model(in);
    r.lrf = in.delta_rnn / lat.delta_total;
  }
  return r;
}

LatencyReport latency_model(const FomInputs& in) {
  if (in.delta_d <= 0 || in.b <= 0 || in.f_bus <= 0)
    throw InputError("delta_d, b, f_bus must be positive");
  LatencyReport r;
  r.delta_rc = in.delta_d * in.b;
  r.delta_prime = r.delta_rc + 2.0 * (in.q * in.n) / in.f_bus;
  r.delta_total = r.delta_prime + in.delta_rr;
  return r;
}

}  // namespace dlr
