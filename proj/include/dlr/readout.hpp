#pragma once

#include <cstdint>
#include <vector>

#include "dlr/matrix.hpp"

namespace dlr {

// Stacked reservoir states X (B x N) with row-aligned labels. All rows must
// come from one fixed (config, mask, filter).
struct StateMatrix {
  Matrix x;
  std::vector<int> labels;
};

// Trained output weights W (N x Q).
struct ReadoutWeights {
  Matrix w;
  double lambda = 0.0;
};

std::vector<double> one_hot(int label, int num_classes);

// B x Q one-hot rows; labels are zero-indexed.
Matrix one_hot_matrix(const std::vector<int>& labels, int num_classes);

// W = (X'X + lambda I)^-1 X'Y, solved through a Cholesky factorization of
// the regularized normal matrix. Targets may be one-hot labels or arbitrary
// regression targets. Throws on a singular normal matrix at lambda = 0.
Matrix ridge_solve(const Matrix& x, const Matrix& y, double lambda);

ReadoutWeights ridge_train(const StateMatrix& states, int num_classes,
                           double lambda);

struct Prediction {
  int label = 0;
  std::vector<double> scores;
};

// score = x W; predicted class = argmax with lowest-index tie-break.
Prediction infer(const std::vector<double>& state,
                 const ReadoutWeights& weights);

// Grid value maximizing held-out accuracy on a seeded 80/20 split of the
// rows; ties go to the smaller lambda. Throws when a class is absent from
// the train part of the split.
double select_lambda(const StateMatrix& states, int num_classes,
                     const std::vector<double>& grid, uint64_t seed);

// In-place Cholesky solve of A X = B for symmetric positive definite A.
// Exposed for the solver tests.
Matrix cholesky_solve(Matrix a, const Matrix& b);

}  // namespace dlr
