#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "dlr/parallel.hpp"
#include "dlr/reservoir.hpp"
#include "dlr/rng.hpp"

using namespace dlr;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace

int main() {
  const int B = 512, L = 128, N = 300;
  ReservoirConfig config;
  config.n_nodes = N;
  CounterRng rng(7);
  std::vector<std::vector<double>> datapoints(B, std::vector<double>(L));
  for (auto& dp : datapoints)
    for (auto& v : dp) v = rng.uniform01();

  LoopMasks masks = make_loop_masks(config);
  FilterKernel filter = make_filter(config.filter_taps, config.filter_time_constant);

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  Matrix serial = collect_states_serial(datapoints, config, masks, filter);
  auto t1 = clock::now();
  Matrix parallel = collect_states(datapoints, config, masks, filter);
  auto t2 = clock::now();

  double ts = seconds(t0, t1), tp = seconds(t1, t2);
  std::printf("collect_states  B=%d L=%d N=%d\n", B, L, N);
  std::printf("  serial   %8.3f s\n", ts);
  std::printf("  openmp   %8.3f s  (%d threads, speedup %.2fx)\n", tp,
              max_worker_threads(), ts / tp);
  std::printf("  max |diff| %.3g\n", max_abs_diff(serial, parallel));

  const int GB = 4000, GN = 400;
  Matrix x(GB, GN);
  for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
  t0 = clock::now();
  Matrix gs = gram_serial(x);
  t1 = clock::now();
  Matrix gp = gram(x);
  t2 = clock::now();
  ts = seconds(t0, t1);
  tp = seconds(t1, t2);
  std::printf("gram            B=%d N=%d\n", GB, GN);
  std::printf("  serial   %8.3f s\n", ts);
  std::printf("  openmp   %8.3f s  (speedup %.2fx)\n", tp, ts / tp);
  std::printf("  max |diff| %.3g\n", max_abs_diff(gs, gp));

  Matrix y(GB, 20);
  for (auto& v : y.data) v = rng.uniform(-1.0, 1.0);
  t0 = clock::now();
  Matrix xs = xty_serial(x, y);
  t1 = clock::now();
  Matrix xp = xty(x, y);
  t2 = clock::now();
  ts = seconds(t0, t1);
  tp = seconds(t1, t2);
  std::printf("xty             B=%d N=%d Q=20\n", GB, GN);
  std::printf("  serial   %8.3f s\n", ts);
  std::printf("  openmp   %8.3f s  (speedup %.2fx)\n", tp, ts / tp);
  std::printf("  max |diff| %.3g\n", max_abs_diff(xs, xp));
  return 0;
}
