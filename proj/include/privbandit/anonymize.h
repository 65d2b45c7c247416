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

// Record transformations: weighted Laplace noise, truncated SVD, global and
// cluster averages, nearest-neighbor substitution, and the normalization
// pipeline every served matrix goes through.

#ifndef PRIVBANDIT_ANONYMIZE_H_
#define PRIVBANDIT_ANONYMIZE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "privbandit/random.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {

// One weight per cell, row-major (index FlatCell(row, col, d)).
using WeightVector = Eigen::VectorXd;

enum class StrategyKind {
  kNone,
  kLaplace,
  kTsvd,
  kGlobalAverage,
  kClusterAverage,
  kNearestNeighbor,
  kSecondNearestNeighbor,
};

// "none", "laplace", "tsvd", "global-average", "cluster-average", "nn",
// "second-nn".
std::string_view StrategyName(StrategyKind kind);
absl::StatusOr<StrategyKind> ParseStrategyKind(std::string_view name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::kNone;
  double epsilon = 0.0;  // Laplace variance, kLaplace only
  int rank = 0;          // kTsvd only
  int multiplier = 1;    // kClusterAverage: clusters = base k * multiplier
  // Per-user Laplace variance applied after the base transform.
  std::optional<double> post_noise;
  // Rank truncation applied after the base transform (and post noise).
  std::optional<int> post_rank;
};

std::string DescribeStrategy(const StrategySpec& spec);

// Adds w_i * z_i to each cell with z_i ~ Laplace(0, sqrt(epsilon / 2)), so
// Var(z_i) = epsilon. epsilon == 0 returns the record untouched and draws
// nothing.
absl::StatusOr<Record> LaplacePerturb(const Record& record,
                                      const WeightVector& weights,
                                      double epsilon, Rng& rng);

// Best rank-k approximation in Frobenius norm; 1 <= k <= min(rows, cols).
absl::StatusOr<Record> TsvdTruncate(const Record& record, int k);

// Frobenius-normalize (skipped for the zero matrix), clip negatives, row-
// normalize, replace all-zero rows with 1/d.
TransitionMatrix NormalizePipeline(const Record& record);

absl::StatusOr<Record> AggregateGlobal(std::span<const Record> records);

struct ClusterMeans {
  std::vector<Record> means;  // one per cluster id
  std::vector<int> sizes;
};

// Per-cluster elementwise means for labels in [0, clusters).
absl::StatusOr<ClusterMeans> AggregateClusters(std::span<const Record> records,
                                               std::span<const int> labels,
                                               int clusters);

// Index of the rank-th closest profile to profiles[query] (Euclidean, query
// excluded, ties to the lowest index).
absl::StatusOr<int> NearestNeighborIndex(
    std::span<const Eigen::VectorXd> profiles, int query, int rank);

absl::StatusOr<Record> NnRecord(std::span<const Eigen::VectorXd> profiles,
                                int query, std::span<const Record> records,
                                int rank);

struct Cohort {
  std::vector<TransitionMatrix> matrices;
  std::vector<Eigen::VectorXd> profiles;
  int cluster_base_k = 1;
  uint64_t clustering_seed = 0;
};

// The released data D-hat. Users sharing a group were served a common base
// record (one group for the global average, one per cluster for cluster
// averages, one per user otherwise).
struct AnonymizedSet {
  std::vector<TransitionMatrix> served;  // per user
  std::vector<int> group_of_user;
  std::vector<int> group_sizes;
};

// Base transform, then optional post noise and post rank, then
// NormalizePipeline for every user. Noise is drawn in user order.
absl::StatusOr<AnonymizedSet> ApplyStrategy(const Cohort& cohort,
                                            const StrategySpec& spec,
                                            const WeightVector& weights,
                                            Rng& rng);

}  // namespace privbandit

#endif  // PRIVBANDIT_ANONYMIZE_H_
