#include <algorithm>
#include <cmath>
#include <vector>

#include "dlr/error.hpp"
#include "dlr/reservoir.hpp"
#include "dlr/rng.hpp"

#include "doctest.h"
#include "oracle.hpp"

using namespace dlr;

namespace {

std::vector<double> random_datapoint(CounterRng& rng, int len) {
  std::vector<double> dp(len);
  for (double& v : dp) v = rng.uniform01();
  return dp;
}

ReservoirConfig random_small_config(CounterRng& rng) {
  ReservoirConfig c;
  c.n_nodes = 1 + (int)rng.below(16);
  c.filter_taps = 1 + (int)rng.below(std::min(4, c.n_nodes));
  c.input_gain = rng.uniform(0.0, 2.0);
  c.feedback_gain = rng.uniform(0.0, 1.0);
  c.filter_time_constant = rng.uniform(0.5, 3.0);
  c.nonlinearity = rng.below(2) ? Nonlinearity::Tanh : Nonlinearity::SinSquared;
  c.accumulate_prior_state = rng.below(2) == 1;
  c.seed = rng.next_u64();
  return c;
}

}  // namespace

TEST_CASE("make_mask is deterministic, bounded and mean-centered") {
  SpreadMask a = make_mask(4, 99);
  SpreadMask b = make_mask(4, 99);
  CHECK(a.chips == b.chips);

  SpreadMask big = make_mask(100000, 123);
  double sum = 0.0;
  for (double c : big.chips) {
    REQUIRE(c > -1.0);
    REQUIRE(c < 1.0);
    sum += c;
  }
  CHECK(std::fabs(sum / big.chips.size()) < 0.02);

  CHECK(make_mask(600, 7).chips.size() == 600);
  CHECK(make_mask(4, 99).chips != make_mask(4, 100).chips);
}

TEST_CASE("make_filter normalizes a causal exponential") {
  FilterKernel one = make_filter(1, 1.0);
  REQUIRE(one.taps.size() == 1);
  CHECK(one.taps[0] == doctest::Approx(1.0).epsilon(1e-15));

  FilterKernel two = make_filter(2, 1.0);
  CHECK(two.taps[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(two.taps[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));

  FilterKernel five = make_filter(5, 1.0);
  REQUIRE(five.taps.size() == 5);
  double sum = 0.0;
  for (size_t j = 0; j < five.taps.size(); ++j) {
    REQUIRE(five.taps[j] > 0.0);
    if (j) REQUIRE(five.taps[j] <= five.taps[j - 1]);
    sum += five.taps[j];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_filter(0, 1.0), InputError);
  CHECK_THROWS_AS(make_filter(3, 0.0), InputError);
  CHECK_THROWS_AS(make_filter(3, -1.0), InputError);
}

TEST_CASE("config validation rejects bad domains") {
  ReservoirConfig c;
  c.n_nodes = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ReservoirConfig{};
  c.filter_taps = c.n_nodes + 1;  // F must not exceed N
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ReservoirConfig{};
  c.filter_time_constant = 0.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ReservoirConfig{};
  c.layers = 3;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ReservoirConfig{};
  c.layers = 2;
  c.layer2_n_nodes = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  CHECK_NOTHROW(ReservoirConfig{}.validate());
}

TEST_CASE("zero input from a cold start stays at zero") {
  for (auto nl : {Nonlinearity::SinSquared, Nonlinearity::Tanh}) {
    ReservoirConfig c;
    c.n_nodes = 8;
    c.nonlinearity = nl;
    SpreadMask mask = make_mask(8, 3);
    FilterKernel filter = make_filter(c.filter_taps, 1.0);
    ReservoirState s = run_loop(std::vector<double>(5, 0.0), c, mask, filter);
    for (double v : s.values) CHECK(v == 0.0);
  }
}

TEST_CASE("single sample with no feedback evaluates the nonlinearity directly") {
  ReservoirConfig c;
  c.n_nodes = 2;
  c.feedback_gain = 0.0;
  c.input_gain = 1.0;
  c.filter_taps = 1;
  SpreadMask mask;
  mask.chips = {1.0, -1.0};
  FilterKernel filter = make_filter(1, 1.0);
  ReservoirState s = run_loop({0.5}, c, mask, filter);
  REQUIRE(s.values.size() == 2);
  // sin^2 is even, so both nodes land on sin^2(0.5)
  CHECK(s.values[0] == doctest::Approx(0.22984884706593015).epsilon(1e-12));
  CHECK(s.values[1] == doctest::Approx(0.22984884706593015).epsilon(1e-12));
}

TEST_CASE("SEI-scale dimensions come out right") {
  ReservoirConfig c;
  c.n_nodes = 600;
  SpreadMask mask = make_mask(600, 7);
  FilterKernel filter = make_filter(5, 1.0);
  CounterRng rng(1);
  ReservoirState s = run_loop(random_datapoint(rng, 256), c, mask, filter);
  CHECK(s.values.size() == 600);
}

TEST_CASE("memoryless mode equals direct evaluation and is mask-equivariant") {
  CounterRng rng(21);
  ReservoirConfig c;
  c.n_nodes = 12;
  c.feedback_gain = 0.0;
  c.filter_taps = 1;
  c.input_gain = 0.8;
  SpreadMask mask = make_mask(12, 5);
  FilterKernel filter = make_filter(1, 1.0);
  std::vector<double> dp = random_datapoint(rng, 7);

  for (auto nl : {Nonlinearity::SinSquared, Nonlinearity::Tanh}) {
    c.nonlinearity = nl;
    ReservoirState s = run_loop(dp, c, mask, filter);
    for (int i = 0; i < 12; ++i) {
      double expect =
          oracle::apply_nl(nl, c.input_gain * dp.back() * mask.chips[i]);
      CHECK(s.values[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    SpreadMask rotated;
    rotated.chips = mask.chips;
    std::rotate(rotated.chips.begin(), rotated.chips.begin() + 3,
                rotated.chips.end());
    ReservoirState sr = run_loop(dp, c, rotated, filter);
    for (int i = 0; i < 12; ++i)
      CHECK(sr.values[i] == doctest::Approx(s.values[(i + 3) % 12]).epsilon(1e-12));
  }
}

TEST_CASE("sin_squared states stay inside [0, 1] without accumulation") {
  CounterRng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    ReservoirConfig c;
    c.n_nodes = 10 + (int)rng.below(30);
    c.input_gain = rng.uniform(0.0, 3.0);
    c.feedback_gain = rng.uniform(0.0, 0.999);
    c.filter_taps = 1 + (int)rng.below(5);
    SpreadMask mask = make_mask(c.n_nodes, rng.next_u64());
    FilterKernel filter = make_filter(c.filter_taps, 1.0);
    ReservoirState s =
        run_loop(random_datapoint(rng, 20), c, mask, filter);
    for (double v : s.values) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
}

TEST_CASE("streaming loop matches the naive full-timeline reference") {
  CounterRng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    ReservoirConfig c = random_small_config(rng);
    int len = 1 + (int)rng.below(8);
    SpreadMask mask = make_mask(c.n_nodes, rng.next_u64());
    FilterKernel filter = make_filter(c.filter_taps, c.filter_time_constant);
    std::vector<double> dp = random_datapoint(rng, len);

    ReservoirState got = run_loop(dp, c, mask, filter);
    std::vector<double> want = oracle::naive_state(dp, c, mask, filter);
    REQUIRE(got.values.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i)
      CHECK(std::fabs(got.values[i] - want[i]) < 1e-12);
  }
}

TEST_CASE("the chip trace equals the naive timeline") {
  CounterRng rng(78);
  ReservoirConfig c = random_small_config(rng);
  SpreadMask mask = make_mask(c.n_nodes, 5);
  FilterKernel filter = make_filter(c.filter_taps, c.filter_time_constant);
  std::vector<double> dp = random_datapoint(rng, 6);
  std::vector<double> trace;
  run_loop(dp, c, mask, filter, &trace);
  std::vector<double> want = oracle::naive_timeline(dp, c, mask, filter);
  REQUIRE(trace.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i)
    CHECK(std::fabs(trace[i] - want[i]) < 1e-12);
}

TEST_CASE("split loop averages the two half states") {
  ReservoirConfig c;
  c.n_nodes = 6;
  c.split = true;
  SpreadMask mask = make_mask(6, 11);
  FilterKernel filter = make_filter(c.filter_taps, 1.0);

  CounterRng rng(41);
  std::vector<double> half = random_datapoint(rng, 5);
  std::vector<double> doubled = half;
  doubled.insert(doubled.end(), half.begin(), half.end());
  ReservoirState split_state = run_split_loop(doubled, c, mask, filter);
  ReservoirState single = run_loop(half, c, mask, filter);
  for (int i = 0; i < 6; ++i)
    CHECK(split_state.values[i] == doctest::Approx(single.values[i]).epsilon(1e-12));

  // odd length: first half takes the extra sample
  std::vector<double> odd = random_datapoint(rng, 9);
  std::vector<double> first(odd.begin(), odd.begin() + 5);
  std::vector<double> second(odd.begin() + 5, odd.end());
  ReservoirState manual_a = run_loop(first, c, mask, filter);
  ReservoirState manual_b = run_loop(second, c, mask, filter);
  ReservoirState got = run_split_loop(odd, c, mask, filter);
  for (int i = 0; i < 6; ++i) {
    double want = 0.5 * (manual_a.values[i] + manual_b.values[i]);
    CHECK(got.values[i] == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK_THROWS_AS(run_split_loop({0.5}, c, mask, filter), InputError);
}

TEST_CASE("split loop at paper scale returns the per-loop size") {
  ReservoirConfig c;
  c.n_nodes = 200;
  c.split = true;
  SpreadMask mask = make_mask(200, 2);
  FilterKernel filter = make_filter(5, 1.0);
  CounterRng rng(1);
  ReservoirState s = run_split_loop(random_datapoint(rng, 256), c, mask, filter);
  CHECK(s.values.size() == 200);
}

TEST_CASE("stacked loops match a two-pass oracle") {
  CounterRng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    ReservoirConfig c = random_small_config(rng);
    c.layers = 2;
    c.layer2_n_nodes = 1 + (int)rng.below(c.n_nodes);
    c.filter_taps = std::min(c.filter_taps, c.layer2_n_nodes);
    SpreadMask mask1 = make_mask(c.n_nodes, rng.next_u64());
    SpreadMask mask2 = make_mask(c.layer2_n_nodes, rng.next_u64());
    FilterKernel filter = make_filter(c.filter_taps, c.filter_time_constant);
    std::vector<double> dp = random_datapoint(rng, 1 + (int)rng.below(8));

    ReservoirState got = run_stacked_loops(dp, c, mask1, mask2, filter);
    std::vector<double> want =
        oracle::naive_stacked_state(dp, c, mask1, mask2, filter);
    REQUIRE(got.values.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i)
      CHECK(std::fabs(got.values[i] - want[i]) < 1e-12);
  }
}

TEST_CASE("stacked loops on the toy sizes from the written examples") {
  ReservoirConfig c;
  c.n_nodes = 64;
  c.layers = 2;
  c.layer2_n_nodes = 32;
  SpreadMask mask1 = make_mask(64, 3);
  SpreadMask mask2 = make_mask(32, 4);
  FilterKernel filter = make_filter(5, 1.0);
  CounterRng rng(6);
  std::vector<double> dp = random_datapoint(rng, 8);
  ReservoirState got = run_stacked_loops(dp, c, mask1, mask2, filter);
  std::vector<double> want = oracle::naive_stacked_state(dp, c, mask1, mask2, filter);
  REQUIRE(got.values.size() == 32);
  for (size_t i = 0; i < want.size(); ++i)
    CHECK(std::fabs(got.values[i] - want[i]) < 1e-12);

  ReservoirState zero =
      run_stacked_loops(std::vector<double>(8, 0.0), c, mask1, mask2, filter);
  for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("split stacked loops average the two layer-2 half states") {
  CounterRng rng(66);
  ReservoirConfig c;
  c.n_nodes = 10;
  c.layers = 2;
  c.layer2_n_nodes = 8;
  c.split = true;
  SpreadMask mask1 = make_mask(10, 9);
  SpreadMask mask2 = make_mask(8, 10);
  FilterKernel filter = make_filter(3, 1.0);
  std::vector<double> dp = random_datapoint(rng, 10);

  std::vector<double> first(dp.begin(), dp.begin() + 5);
  std::vector<double> second(dp.begin() + 5, dp.end());
  ReservoirConfig single = c;
  single.split = false;
  std::vector<double> wa =
      oracle::naive_stacked_state(first, single, mask1, mask2, filter);
  std::vector<double> wb =
      oracle::naive_stacked_state(second, single, mask1, mask2, filter);

  LoopMasks masks{mask1, mask2};
  ReservoirState got = run_datapoint(dp, c, masks, filter);
  REQUIRE(got.values.size() == 8);
  for (size_t i = 0; i < 8; ++i)
    CHECK(got.values[i] == doctest::Approx(0.5 * (wa[i] + wb[i])).epsilon(1e-12));
}

TEST_CASE("run_datapoint dispatches on the config flags") {
  CounterRng rng(81);
  ReservoirConfig c;
  c.n_nodes = 8;
  LoopMasks masks = make_loop_masks(c);
  FilterKernel filter = make_filter(c.filter_taps, 1.0);
  std::vector<double> dp = random_datapoint(rng, 6);

  ReservoirState plain = run_datapoint(dp, c, masks, filter);
  ReservoirState direct = run_loop(dp, c, masks.layer1, filter);
  CHECK(plain.values == direct.values);

  c.split = true;
  ReservoirState split_state = run_datapoint(dp, c, masks, filter);
  ReservoirState split_direct = run_split_loop(dp, c, masks.layer1, filter);
  CHECK(split_state.values == split_direct.values);

  c.split = false;
  c.layers = 2;
  c.layer2_n_nodes = 8;
  LoopMasks masks2 = make_loop_masks(c);
  ReservoirState stacked = run_datapoint(dp, c, masks2, filter);
  ReservoirState stacked_direct =
      run_stacked_loops(dp, c, masks2.layer1, masks2.layer2, filter);
  CHECK(stacked.values == stacked_direct.values);
}

TEST_CASE("mask length and input validity are enforced") {
  ReservoirConfig c;
  c.n_nodes = 4;
  SpreadMask wrong = make_mask(3, 1);
  FilterKernel filter = make_filter(c.filter_taps, 1.0);
  CHECK_THROWS_AS(run_loop({0.1}, c, wrong, filter), InputError);

  SpreadMask mask = make_mask(4, 1);
  CHECK_THROWS_AS(run_loop({}, c, mask, filter), InputError);
  std::vector<double> nan_dp = {0.1, std::nan("")};
  CHECK_THROWS_AS(run_loop(nan_dp, c, mask, filter), InputError);
}
