#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <utility>

namespace dlr {

// Counter-mode generator built on the SplitMix64 finalizer.
// Every output is a pure function of (key, counter), so child streams can be
// forked per device / per burst / per datapoint and replayed bit-exactly
// regardless of evaluation order or thread count.
class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : key_(key) {}

  uint64_t next_u64() { return mix(key_, counter_++); }

  // 53-bit mantissa uniform on [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // open interval (-1, 1); the lone draw mapping to -1 is rejected
  double open_symmetric() {
    for (;;) {
      double v = 2.0 * uniform01() - 1.0;
      if (v > -1.0) return v;
    }
  }

  // unbiased integer in [0, n) by rejection
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      uint64_t v = next_u64();
      if (v < limit) return v % n;
    }
  }

  // Box-Muller pair; consumes exactly two draws
  std::pair<double, double> normal_pair() {
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  double normal() { return normal_pair().first; }

  // child stream keyed by a label; independent of this stream's counter
  CounterRng derive(std::string_view label) const {
    uint64_t h = key_ ^ 0x9e3779b97f4a7c15ULL;
    for (unsigned char c : label) {
      h = (h ^ c) * 0x100000001b3ULL;
    }
    return CounterRng(finalize(h));
  }

  CounterRng derive(uint64_t index) const {
    return CounterRng(finalize(key_ ^ mix(0xa0761d6478bd642fULL, index)));
  }

  uint64_t key() const { return key_; }

 private:
  static uint64_t finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static uint64_t mix(uint64_t key, uint64_t ctr) {
    return finalize(key + (ctr + 1) * 0x9e3779b97f4a7c15ULL);
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace dlr
