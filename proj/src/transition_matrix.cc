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

#include "privbandit/transition_matrix.h"

#include <cassert>
#include <cmath>

#include "absl/strings/str_format.h"

namespace privbandit {

absl::StatusOr<TransitionMatrix> TransitionMatrix::FromMatrix(
    Matrix m, double tolerance) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "transition matrix must be square and non-empty, got %dx%d", m.rows(),
        m.cols()));
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < -tolerance || v > 1.0 + tolerance) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "entry (%d, %d) = %g is outside [0, 1]", i, j, v));
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > tolerance) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "row %d sums to %.12g, deviation exceeds %g", i, sum, tolerance));
    }
  }
  // Rows already within the stored tolerance are kept bit-for-bit so that
  // matrices survive a write/read cycle unchanged.
  m = m.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double sum = m.row(i).sum();
    if (std::fabs(sum - 1.0) > kStochasticTolerance) m.row(i) /= sum;
  }
  return TransitionMatrix(std::move(m));
}

TransitionMatrix TransitionMatrix::FromNonNegative(Matrix m) {
  assert(m.rows() == m.cols() && m.rows() > 0);
  const double uniform = 1.0 / static_cast<double>(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double sum = m.row(i).sum();
    if (sum > 0.0) {
      m.row(i) /= sum;
    } else {
      m.row(i).setConstant(uniform);
    }
  }
  return TransitionMatrix(std::move(m));
}

TransitionMatrix TransitionMatrix::Uniform(int d) {
  return TransitionMatrix(Matrix::Constant(d, d, 1.0 / d));
}

TransitionMatrix TransitionMatrix::Identity(int d) {
  return TransitionMatrix(Matrix::Identity(d, d));
}

double MaxRowSumDeviation(const Matrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    worst = std::max(worst, std::fabs(m.row(i).sum() - 1.0));
  }
  return worst;
}

std::vector<Matrix> ToRecords(std::span<const TransitionMatrix> matrices) {
  std::vector<Matrix> out;
  out.reserve(matrices.size());
  for (const auto& t : matrices) out.push_back(t.matrix());
  return out;
}

}  // namespace privbandit
