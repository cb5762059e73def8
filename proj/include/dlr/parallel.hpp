#pragma once

#include <vector>

#include "dlr/matrix.hpp"
#include "dlr/reservoir.hpp"

namespace dlr {

// In every kernel here each output element is produced by exactly one
// iteration with a fixed inner summation order, so the OpenMP variants are
// bitwise identical to the serial references for any thread count.

// Stacks one reservoir state per datapoint into a B x N matrix, row order =
// input order.
Matrix collect_states(const std::vector<std::vector<double>>& datapoints,
                      const ReservoirConfig& config, const LoopMasks& masks,
                      const FilterKernel& filter);
Matrix collect_states_serial(const std::vector<std::vector<double>>& datapoints,
                             const ReservoirConfig& config,
                             const LoopMasks& masks,
                             const FilterKernel& filter);

// G = X'X (N x N, symmetric).
Matrix gram(const Matrix& x);
Matrix gram_serial(const Matrix& x);

// X'Y (N x Q).
Matrix xty(const Matrix& x, const Matrix& y);
Matrix xty_serial(const Matrix& x, const Matrix& y);

// 0 keeps the OpenMP runtime default.
void set_worker_threads(int threads);
int max_worker_threads();

}  // namespace dlr
