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

#ifndef PRIVBANDIT_PRIVACY_METRICS_H_
#define PRIVBANDIT_PRIVACY_METRICS_H_

#include <span>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "privbandit/anonymize.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {

inline constexpr int kDefaultEntropyBins = 20;
inline constexpr double kDefaultEntropyFloor = 1e-3;

// Shannon entropy (nats) of each cell's values across the cohort, histogrammed
// into `bins` equal-width bins over [0, 1]. Values outside [0, 1] land in the
// edge bins.
absl::StatusOr<Eigen::VectorXd> CellEntropies(std::span<const Record> cohort,
                                              int bins = kDefaultEntropyBins);

// w_i = 1 / max(H_i, floor).
absl::StatusOr<WeightVector> EntropyWeights(
    std::span<const Record> cohort, int bins = kDefaultEntropyBins,
    double floor = kDefaultEntropyFloor);

// Fraction of real records whose nearest released record is strictly closer
// than their nearest other real record, distances being ||w .* (a - b)||.
absl::StatusOr<double> AdsIdentifiability(std::span<const Record> real,
                                          std::span<const Record> released,
                                          const WeightVector& weights);

}  // namespace privbandit

#endif  // PRIVBANDIT_PRIVACY_METRICS_H_
