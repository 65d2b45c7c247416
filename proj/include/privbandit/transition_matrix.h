// Copyright 2026 The PrivBandit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVBANDIT_TRANSITION_MATRIX_H_
#define PRIVBANDIT_TRANSITION_MATRIX_H_

#include <span>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace privbandit {

// Dense real matrix. Mid-pipeline records may be non-stochastic or negative.
using Matrix = Eigen::MatrixXd;

// A record is a user's d x d matrix at any stage of anonymization.
using Record = Matrix;

// Cells of a d x d matrix are addressed row-major: cell = row * d + col.
inline int FlatCell(int row, int col, int d) { return row * d + col; }

// Row sums of a TransitionMatrix are 1 within this tolerance.
inline constexpr double kStochasticTolerance = 1e-9;

// Row-stochastic d x d matrix: entry (i, j) is P(S_{t+1} = j | S_t = i).
class TransitionMatrix {
 public:
  // Validates that `m` is square, finite, entry-bounded in [0, 1] and that
  // every row sums to 1 within `tolerance`. Negative round-off is clipped and
  // rows off by more than kStochasticTolerance are renormalized.
  static absl::StatusOr<TransitionMatrix> FromMatrix(Matrix m,
                                                     double tolerance = 1e-6);

  // Row-normalizes a finite, non-negative matrix. All-zero rows (missing
  // states) become the uniform row 1/d.
  static TransitionMatrix FromNonNegative(Matrix m);

  static TransitionMatrix Uniform(int d);
  static TransitionMatrix Identity(int d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int from, int to) const { return m_(from, to); }

  friend bool operator==(const TransitionMatrix& a,
                         const TransitionMatrix& b) {
    return a.m_ == b.m_;
  }

 private:
  explicit TransitionMatrix(Matrix m) : m_(std::move(m)) {}

  Matrix m_;
};

// Largest |row sum - 1| over all rows.
double MaxRowSumDeviation(const Matrix& m);

// Copies the underlying matrices, e.g. to feed record-level transforms.
std::vector<Matrix> ToRecords(std::span<const TransitionMatrix> matrices);

}  // namespace privbandit

#endif  // PRIVBANDIT_TRANSITION_MATRIX_H_
