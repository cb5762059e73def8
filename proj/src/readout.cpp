#include "dlr/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dlr/error.hpp"
#include "dlr/parallel.hpp"
#include "dlr/rng.hpp"

namespace dlr {

std::vector<double> one_hot(int label, int num_classes) {
  if (num_classes < 1) throw InputError("num_classes must be >= 1");
  if (label < 0 || label >= num_classes)
    throw InputError("label out of range for one-hot encoding");
  std::vector<double> row(static_cast<size_t>(num_classes), 0.0);
  row[static_cast<size_t>(label)] = 1.0;
  return row;
}

Matrix one_hot_matrix(const std::vector<int>& labels, int num_classes) {
  Matrix y(labels.size(), static_cast<size_t>(num_classes));
  for (size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || labels[r] >= num_classes)
      throw InputError("label out of range for one-hot encoding");
    y(r, static_cast<size_t>(labels[r])) = 1.0;
  }
  return y;
}

Matrix cholesky_solve(Matrix a, const Matrix& b) {
  const size_t n = a.rows;
  if (a.cols != n || b.rows != n) throw InputError("cholesky dimension mismatch");

  // lower triangle of a becomes L
  for (size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw InputError("normal matrix is singular; use lambda > 0");
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      const double* ri = a.row(i);
      const double* rj = a.row(j);
      for (size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
      a(i, j) = s / ljj;
    }
  }

  // L z = b, then L' x = z, one right-hand side per column
  Matrix x = b;
  for (size_t c = 0; c < b.cols; ++c) {
    for (size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (size_t k = 0; k < i; ++k) s -= a(i, k) * x(k, c);
      x(i, c) = s / a(i, i);
    }
    for (size_t ii = n; ii-- > 0;) {
      double s = x(ii, c);
      for (size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * x(k, c);
      x(ii, c) = s / a(ii, ii);
    }
  }
  return x;
}

Matrix ridge_solve(const Matrix& x, const Matrix& y, double lambda) {
  if (x.rows != y.rows) throw InputError("state/target row counts differ");
  if (x.rows == 0) throw InputError("empty training set");
  if (lambda < 0.0) throw InputError("lambda must be >= 0");

  Matrix g = gram(x);
  for (size_t i = 0; i < g.rows; ++i) g(i, i) += lambda;
  const Matrix c = xty(x, y);
  return cholesky_solve(std::move(g), c);
}

ReadoutWeights ridge_train(const StateMatrix& states, int num_classes,
                           double lambda) {
  if (states.labels.size() != states.x.rows)
    throw InputError("label count does not match state rows");
  const Matrix y = one_hot_matrix(states.labels, num_classes);
  ReadoutWeights w;
  w.w = ridge_solve(states.x, y, lambda);
  w.lambda = lambda;
  return w;
}

Prediction infer(const std::vector<double>& state,
                 const ReadoutWeights& weights) {
  if (state.size() != weights.w.rows)
    throw InputError("state length does not match weight rows");
  Prediction p;
  p.scores.assign(weights.w.cols, 0.0);
  for (size_t i = 0; i < state.size(); ++i) {
    const double xi = state[i];
    const double* row = weights.w.row(i);
    for (size_t c = 0; c < weights.w.cols; ++c) p.scores[c] += xi * row[c];
  }
  p.label = static_cast<int>(
      std::max_element(p.scores.begin(), p.scores.end()) - p.scores.begin());
  return p;
}

double select_lambda(const StateMatrix& states, int num_classes,
                     const std::vector<double>& grid, uint64_t seed) {
  if (grid.empty()) throw InputError("empty lambda grid");
  for (double g : grid) {
    if (g < 0.0) throw InputError("lambda grid entries must be >= 0");
  }
  const size_t b = states.x.rows;
  if (b < 2) throw InputError("need at least 2 rows to split");

  std::vector<size_t> order(b);
  std::iota(order.begin(), order.end(), size_t{0});
  CounterRng rng = CounterRng(seed).derive("lambda-split");
  for (size_t i = b; i-- > 1;) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  const size_t train_count = (b * 8) / 10;
  if (train_count == 0 || train_count == b)
    throw InputError("split produced an empty part");

  auto take = [&](size_t from, size_t to) {
    StateMatrix part;
    part.x = Matrix(to - from, states.x.cols);
    part.labels.resize(to - from);
    for (size_t r = from; r < to; ++r) {
      const size_t src = order[r];
      std::copy(states.x.row(src), states.x.row(src) + states.x.cols,
                part.x.row(r - from));
      part.labels[r - from] = states.labels[src];
    }
    return part;
  };
  StateMatrix train = take(0, train_count);
  StateMatrix held = take(train_count, b);

  std::vector<bool> seen(static_cast<size_t>(num_classes), false);
  for (int l : train.labels) seen[static_cast<size_t>(l)] = true;
  for (int l : held.labels) {
    if (!seen[static_cast<size_t>(l)])
      throw InputError("degenerate split: class absent from train part");
  }

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best_lambda = sorted.front();
  double best_acc = -1.0;
  std::vector<double> row(states.x.cols);
  for (double lam : sorted) {
    ReadoutWeights w = ridge_train(train, num_classes, lam);
    size_t hits = 0;
    for (size_t r = 0; r < held.x.rows; ++r) {
      std::copy(held.x.row(r), held.x.row(r) + held.x.cols, row.begin());
      if (infer(row, w).label == held.labels[r]) ++hits;
    }
    const double acc = static_cast<double>(hits) / static_cast<double>(held.x.rows);
    if (acc > best_acc) {  // ties keep the smaller lambda
      best_acc = acc;
      best_lambda = lam;
    }
  }
  return best_lambda;
}

}  // namespace dlr
