#include "dlr/parallel.hpp"

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dlr/error.hpp"

namespace dlr {

namespace {

void fill_state_row(Matrix& out, size_t b,
                    const std::vector<std::vector<double>>& datapoints,
                    const ReservoirConfig& config, const LoopMasks& masks,
                    const FilterKernel& filter) {
  ReservoirState st = run_datapoint(datapoints[b], config, masks, filter);
  double* row = out.row(b);
  for (size_t i = 0; i < st.values.size(); ++i) row[i] = st.values[i];
}

inline double dot(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

// X transposed once so every Gram entry is a contiguous dot product.
Matrix transpose(const Matrix& x) {
  Matrix xt(x.cols, x.rows);
  for (size_t r = 0; r < x.rows; ++r) {
    const double* row = x.row(r);
    for (size_t c = 0; c < x.cols; ++c) xt(c, r) = row[c];
  }
  return xt;
}

void gram_rows(Matrix& g, const Matrix& xt, size_t i) {
  const size_t n = xt.rows;
  const size_t b = xt.cols;
  const double* ri = xt.row(i);
  for (size_t j = i; j < n; ++j) {
    const double v = dot(ri, xt.row(j), b);
    g(i, j) = v;
    g(j, i) = v;
  }
}

void xty_row(Matrix& out, const Matrix& x, const Matrix& y, size_t i) {
  const size_t q = y.cols;
  for (size_t c = 0; c < q; ++c) {
    double acc = 0.0;
    for (size_t r = 0; r < x.rows; ++r) acc += x(r, i) * y(r, c);
    out(i, c) = acc;
  }
}

}  // namespace

Matrix collect_states(const std::vector<std::vector<double>>& datapoints,
                      const ReservoirConfig& config, const LoopMasks& masks,
                      const FilterKernel& filter) {
  if (datapoints.empty()) throw InputError("no datapoints");
  const size_t n = static_cast<size_t>(
      config.layers == 2 ? config.layer2_n_nodes : config.n_nodes);
  Matrix out(datapoints.size(), n);
#pragma omp parallel for schedule(static)
  for (ptrdiff_t b = 0; b < static_cast<ptrdiff_t>(datapoints.size()); ++b) {
    fill_state_row(out, static_cast<size_t>(b), datapoints, config, masks,
                   filter);
  }
  return out;
}

Matrix collect_states_serial(const std::vector<std::vector<double>>& datapoints,
                             const ReservoirConfig& config,
                             const LoopMasks& masks,
                             const FilterKernel& filter) {
  if (datapoints.empty()) throw InputError("no datapoints");
  const size_t n = static_cast<size_t>(
      config.layers == 2 ? config.layer2_n_nodes : config.n_nodes);
  Matrix out(datapoints.size(), n);
  for (size_t b = 0; b < datapoints.size(); ++b) {
    fill_state_row(out, b, datapoints, config, masks, filter);
  }
  return out;
}

Matrix gram(const Matrix& x) {
  const Matrix xt = transpose(x);
  Matrix g(x.cols, x.cols);
#pragma omp parallel for schedule(dynamic, 8)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(x.cols); ++i) {
    gram_rows(g, xt, static_cast<size_t>(i));
  }
  return g;
}

Matrix gram_serial(const Matrix& x) {
  const Matrix xt = transpose(x);
  Matrix g(x.cols, x.cols);
  for (size_t i = 0; i < x.cols; ++i) gram_rows(g, xt, i);
  return g;
}

Matrix xty(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows) throw InputError("X and Y row counts differ");
  Matrix out(x.cols, y.cols);
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(x.cols); ++i) {
    xty_row(out, x, y, static_cast<size_t>(i));
  }
  return out;
}

Matrix xty_serial(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows) throw InputError("X and Y row counts differ");
  Matrix out(x.cols, y.cols);
  for (size_t i = 0; i < x.cols; ++i) xty_row(out, x, y, i);
  return out;
}

void set_worker_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int max_worker_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dlr
