#pragma once

namespace dlr {

struct StabilityParams {
  double one_pass_gain = 0.0;  // eta or alpha
  int traversals = 1;          // K
};

struct GainResult {
  double gain = 0.0;
  bool stable = false;
};

// G = eta^K; stable iff G < 1 strictly.
GainResult loop_gain(const StabilityParams& params);

// G_ave = (1/(K+1)) * sum_{k=1..K} alpha^k, exact finite geometric sum.
GainResult average_gain(double alpha, int traversals);

struct FomInputs {
  double m_rnn = 2.1e6;        // baseline parameter count
  double c_rnn = 6.5e13;       // baseline training operation count
  double delta_rnn = 0.0;      // baseline latency, seconds (0: LRF skipped)
  double q = 20;               // classes
  double n = 800;              // reservoir size
  double b = 8000;             // training datapoints
  double delta_d = 26e-6;      // per-datapoint loop time, seconds
  double f_bus = 256e6;        // bus clock, Hz
  double delta_rr = 0.5;       // readout-training latency, seconds
};

struct FomReport {
  double m_dlr = 0.0;          // Q*N
  double c_dlr_train = 0.0;    // B*N^2
  double c_dlr_infer = 0.0;    // Q*N^2
  double srf = 0.0;            // M_RNN / M_DLR
  double hcrf = 0.0;           // C_RNN / C_DLR(train)
  double lrf = 0.0;            // Delta_RNN / Delta_DLR (0 when skipped)
  FomInputs inputs;
};

FomReport compute_foms(const FomInputs& inputs);

struct LatencyReport {
  double delta_rc = 0.0;       // Delta_d * B
  double delta_prime = 0.0;    // Delta_RC + 2*M_DLR/f_bus
  double delta_total = 0.0;    // Delta' + Delta_RR
};

LatencyReport latency_model(const FomInputs& inputs);

}  // namespace dlr
