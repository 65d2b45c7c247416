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

#include "privbandit/privacy_metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "absl/strings/str_format.h"

namespace privbandit {
namespace {

absl::Status CheckCells(std::span<const Record> records, Eigen::Index cells) {
  for (const Record& r : records) {
    if (r.size() != cells) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "record has %d cells, expected %d", r.size(), cells));
    }
  }
  return absl::OkStatus();
}

// Row-major flattening to match WeightVector indexing.
Eigen::VectorXd Flatten(const Record& r) {
  Eigen::VectorXd out(r.size());
  const int cols = static_cast<int>(r.cols());
  for (int i = 0; i < r.rows(); ++i) {
    for (int j = 0; j < cols; ++j) out[FlatCell(i, j, cols)] = r(i, j);
  }
  return out;
}

}  // namespace

absl::StatusOr<Eigen::VectorXd> CellEntropies(std::span<const Record> cohort,
                                              int bins) {
  if (cohort.empty()) return absl::InvalidArgumentError("empty cohort");
  if (bins < 2) return absl::InvalidArgumentError("need at least two bins");
  const Eigen::Index cells = cohort.front().size();
  if (absl::Status s = CheckCells(cohort, cells); !s.ok()) return s;
  std::vector<Eigen::VectorXd> flat;
  flat.reserve(cohort.size());
  for (const Record& r : cohort) flat.push_back(Flatten(r));

  const double n = static_cast<double>(cohort.size());
  Eigen::VectorXd entropy(cells);
  std::vector<int> counts(bins);
  for (Eigen::Index c = 0; c < cells; ++c) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const Eigen::VectorXd& v : flat) {
      const double x = std::clamp(v[c], 0.0, 1.0);
      const int b = std::min(static_cast<int>(x * bins), bins - 1);
      ++counts[b];
    }
    double h = 0.0;
    for (int count : counts) {
      if (count == 0) continue;
      const double p = count / n;
      h -= p * std::log(p);
    }
    entropy[c] = h;
  }
  return entropy;
}

absl::StatusOr<WeightVector> EntropyWeights(std::span<const Record> cohort,
                                            int bins, double floor) {
  if (!(floor > 0.0)) {
    return absl::InvalidArgumentError("entropy floor must be positive");
  }
  absl::StatusOr<Eigen::VectorXd> h = CellEntropies(cohort, bins);
  if (!h.ok()) return h.status();
  return WeightVector(h->cwiseMax(floor).cwiseInverse());
}

absl::StatusOr<double> AdsIdentifiability(std::span<const Record> real,
                                          std::span<const Record> released,
                                          const WeightVector& weights) {
  if (real.size() < 2) {
    return absl::InvalidArgumentError(
        "identifiability needs at least two real records");
  }
  if (released.empty()) {
    return absl::InvalidArgumentError("no released records");
  }
  const Eigen::Index cells = weights.size();
  if (absl::Status s = CheckCells(real, cells); !s.ok()) return s;
  if (absl::Status s = CheckCells(released, cells); !s.ok()) return s;

  std::vector<Eigen::VectorXd> a, b;
  for (const Record& r : real) a.push_back(weights.cwiseProduct(Flatten(r)));
  for (const Record& r : released) {
    b.push_back(weights.cwiseProduct(Flatten(r)));
  }
  int identified = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double k = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (j != i) k = std::min(k, (a[i] - a[j]).squaredNorm());
    }
    double k_hat = std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& r : b) {
      k_hat = std::min(k_hat, (a[i] - r).squaredNorm());
    }
    if (k_hat < k) ++identified;
  }
  return static_cast<double>(identified) / static_cast<double>(a.size());
}

}  // namespace privbandit
