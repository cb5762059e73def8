#include <cmath>

#include "dlr/analysis.hpp"

#include "doctest.h"
#include "oracle.hpp"

using namespace dlr;

TEST_CASE("loop gain is a bare power of the one-pass gain") {
  GainResult g = loop_gain({1.0, 1000});
  CHECK(g.gain == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(g.stable);

  g = loop_gain({0.5, 2});
  CHECK(g.gain == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.stable);

  g = loop_gain({1.001, 1000});
  CHECK(g.gain == doctest::Approx(std::pow(1.001, 1000)).epsilon(1e-12));
  CHECK(g.gain > 2.7);
  CHECK_FALSE(g.stable);
}

TEST_CASE("average gain closed form against known points") {
  CHECK(average_gain(0.0, 100).gain == 0.0);
  CHECK(average_gain(0.0, 100).stable);

  GainResult g = average_gain(0.999, 1000);
  CHECK(g.gain == doctest::Approx(0.631041).epsilon(2e-6));
  CHECK(g.stable);

  // alpha = 1 collapses to K/(K+1): the average stays below one even though
  // the bare loop gain does not contract
  g = average_gain(1.0, 1000);
  CHECK(g.gain == doctest::Approx(1000.0 / 1001.0).epsilon(1e-12));
  CHECK(g.stable);
  CHECK_FALSE(loop_gain({1.0, 1000}).stable);
}

TEST_CASE("average gain closed form equals the brute sum") {
  for (double alpha : {0.1, 0.5, 0.9, 0.999, 1.0, 1.05}) {
    for (int k : {1, 10, 1000}) {
      GainResult g = average_gain(alpha, k);
      double brute = oracle::brute_average_gain(alpha, k);
      CHECK(g.gain == doctest::Approx(brute).epsilon(1e-10));
    }
  }
  // large K exercises the closed form where brute summation would drift
  GainResult g = average_gain(0.5, 1000000);
  CHECK(g.gain == doctest::Approx(1.0 / 1000001.0).epsilon(1e-9));
}

TEST_CASE("figures of merit at the reference operating point") {
  FomInputs in;
  in.q = 20;
  in.n = 800;
  in.b = 8000;
  in.m_rnn = 2.1e6;
  in.c_rnn = 6.5e13;
  FomReport r = compute_foms(in);
  CHECK(r.m_dlr == 16000.0);
  CHECK(r.c_dlr_train == 8000.0 * 800.0 * 800.0);
  CHECK(r.c_dlr_infer == 20.0 * 800.0 * 800.0);
  CHECK(r.srf == doctest::Approx(131.25).epsilon(1e-12));
  CHECK(r.hcrf == doctest::Approx(6.5e13 / 5.12e9).epsilon(1e-12));
  CHECK(r.lrf == 0.0);  // no baseline latency supplied

  in.delta_rnn = 2.0;
  r = compute_foms(in);
  CHECK(r.lrf > 0.0);
}

TEST_CASE("figures of merit at the smaller classifier size") {
  FomInputs in;
  in.q = 20;
  in.n = 600;
  in.b = 8000;
  FomReport r = compute_foms(in);
  CHECK(r.m_dlr == 12000.0);
  CHECK(r.c_dlr_infer == 20.0 * 600.0 * 600.0);
  CHECK(r.c_dlr_infer == 7.2e6);
}

TEST_CASE("latency model composes loop, transfer and solve terms") {
  FomInputs in;
  in.q = 20;
  in.n = 800;
  in.b = 8000;
  in.delta_d = 26e-6;
  in.f_bus = 256e6;
  in.delta_rr = 0.5;
  LatencyReport r = latency_model(in);
  CHECK(r.delta_rc == doctest::Approx(0.208).epsilon(1e-12));
  double transfer = 2.0 * 16000.0 / 256e6;
  CHECK(transfer == doctest::Approx(1.25e-4).epsilon(1e-12));
  CHECK(r.delta_prime == doctest::Approx(0.208 + transfer).epsilon(1e-12));
  CHECK(r.delta_total == doctest::Approx(0.708125).epsilon(1e-12));
}
