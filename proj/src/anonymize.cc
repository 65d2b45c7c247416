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

#include "privbandit/anonymize.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "privbandit/profiles.h"

namespace privbandit {
namespace {

constexpr struct {
  StrategyKind kind;
  std::string_view name;
} kStrategyNames[] = {
    {StrategyKind::kNone, "none"},
    {StrategyKind::kLaplace, "laplace"},
    {StrategyKind::kTsvd, "tsvd"},
    {StrategyKind::kGlobalAverage, "global-average"},
    {StrategyKind::kClusterAverage, "cluster-average"},
    {StrategyKind::kNearestNeighbor, "nn"},
    {StrategyKind::kSecondNearestNeighbor, "second-nn"},
};

absl::Status CheckSameShape(std::span<const Record> records) {
  if (records.empty()) return absl::InvalidArgumentError("no records");
  for (const Record& r : records) {
    if (r.rows() != records.front().rows() ||
        r.cols() != records.front().cols()) {
      return absl::InvalidArgumentError("records differ in shape");
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view StrategyName(StrategyKind kind) {
  for (const auto& entry : kStrategyNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

absl::StatusOr<StrategyKind> ParseStrategyKind(std::string_view name) {
  for (const auto& entry : kStrategyNames) {
    if (entry.name == name) return entry.kind;
  }
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown strategy '%s'", std::string(name)));
}

std::string DescribeStrategy(const StrategySpec& spec) {
  std::string out(StrategyName(spec.kind));
  switch (spec.kind) {
    case StrategyKind::kLaplace:
      absl::StrAppend(&out, " eps=", spec.epsilon);
      break;
    case StrategyKind::kTsvd:
      absl::StrAppend(&out, " k=", spec.rank);
      break;
    case StrategyKind::kClusterAverage:
      absl::StrAppend(&out, " x", spec.multiplier);
      break;
    default:
      break;
  }
  if (spec.post_noise) absl::StrAppend(&out, " +eps=", *spec.post_noise);
  if (spec.post_rank) absl::StrAppend(&out, " +k=", *spec.post_rank);
  return out;
}

absl::StatusOr<Record> LaplacePerturb(const Record& record,
                                      const WeightVector& weights,
                                      double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be finite and >= 0, got %g", epsilon));
  }
  if (weights.size() != record.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "weight vector has %d entries for %d cells", weights.size(),
        record.size()));
  }
  if (epsilon == 0.0) return record;
  const double scale = std::sqrt(epsilon / 2.0);
  const int cols = static_cast<int>(record.cols());
  Record out = record;
  for (int i = 0; i < record.rows(); ++i) {
    for (int j = 0; j < cols; ++j) {
      out(i, j) += weights[FlatCell(i, j, cols)] * rng.Laplace(scale);
    }
  }
  return out;
}

absl::StatusOr<Record> TsvdTruncate(const Record& record, int k) {
  const int max_rank = static_cast<int>(std::min(record.rows(), record.cols()));
  if (k < 1 || k > max_rank) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rank %d outside [1, %d]", k, max_rank));
  }
  Eigen::JacobiSVD<Matrix> svd(record,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(k) *
         svd.singularValues().head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

TransitionMatrix NormalizePipeline(const Record& record) {
  Matrix m = record;
  const double norm = m.norm();
  if (norm > 0.0) m /= norm;
  m = m.cwiseMax(0.0);
  return TransitionMatrix::FromNonNegative(std::move(m));
}

absl::StatusOr<Record> AggregateGlobal(std::span<const Record> records) {
  if (absl::Status s = CheckSameShape(records); !s.ok()) return s;
  Record sum = Record::Zero(records.front().rows(), records.front().cols());
  for (const Record& r : records) sum += r;
  return Record(sum / static_cast<double>(records.size()));
}

absl::StatusOr<ClusterMeans> AggregateClusters(std::span<const Record> records,
                                               std::span<const int> labels,
                                               int clusters) {
  if (absl::Status s = CheckSameShape(records); !s.ok()) return s;
  if (labels.size() != records.size()) {
    return absl::InvalidArgumentError("one label per record required");
  }
  if (clusters < 1) return absl::InvalidArgumentError("clusters must be >= 1");
  ClusterMeans out;
  out.sizes.assign(clusters, 0);
  out.means.assign(clusters, Record::Zero(records.front().rows(),
                                          records.front().cols()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= clusters) {
      return absl::OutOfRangeError(absl::StrFormat(
          "label %d outside [0, %d)", labels[i], clusters));
    }
    out.means[labels[i]] += records[i];
    ++out.sizes[labels[i]];
  }
  for (int c = 0; c < clusters; ++c) {
    if (out.sizes[c] == 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("cluster %d has no members", c));
    }
    if (out.sizes[c] > 1) out.means[c] /= out.sizes[c];
  }
  return out;
}

absl::StatusOr<int> NearestNeighborIndex(
    std::span<const Eigen::VectorXd> profiles, int query, int rank) {
  const int n = static_cast<int>(profiles.size());
  if (query < 0 || query >= n) {
    return absl::OutOfRangeError(
        absl::StrFormat("query %d out of range", query));
  }
  if (rank < 1 || rank > n - 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "rank %d needs at least %d candidates, have %d", rank, rank, n - 1));
  }
  std::vector<std::pair<double, int>> order;
  order.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i == query) continue;
    if (profiles[i].size() != profiles[query].size()) {
      return absl::InvalidArgumentError("profiles differ in length");
    }
    order.emplace_back((profiles[i] - profiles[query]).squaredNorm(), i);
  }
  std::nth_element(order.begin(), order.begin() + (rank - 1), order.end());
  return order[rank - 1].second;
}

absl::StatusOr<Record> NnRecord(std::span<const Eigen::VectorXd> profiles,
                                int query, std::span<const Record> records,
                                int rank) {
  if (records.size() != profiles.size()) {
    return absl::InvalidArgumentError("one record per profile required");
  }
  absl::StatusOr<int> index = NearestNeighborIndex(profiles, query, rank);
  if (!index.ok()) return index.status();
  return records[*index];
}

absl::StatusOr<AnonymizedSet> ApplyStrategy(const Cohort& cohort,
                                            const StrategySpec& spec,
                                            const WeightVector& weights,
                                            Rng& rng) {
  const int n = static_cast<int>(cohort.matrices.size());
  if (n == 0) return absl::InvalidArgumentError("empty cohort");
  const int d = cohort.matrices.front().dim();
  for (const TransitionMatrix& m : cohort.matrices) {
    if (m.dim() != d) {
      return absl::InvalidArgumentError("cohort matrices differ in dimension");
    }
  }
  const std::vector<Record> records = ToRecords(cohort.matrices);

  AnonymizedSet out;
  out.group_of_user.resize(n);
  std::iota(out.group_of_user.begin(), out.group_of_user.end(), 0);
  out.group_sizes.assign(n, 1);
  std::vector<Record> base(n);

  switch (spec.kind) {
    case StrategyKind::kNone:
      base = records;
      break;
    case StrategyKind::kLaplace:
      for (int u = 0; u < n; ++u) {
        absl::StatusOr<Record> r =
            LaplacePerturb(records[u], weights, spec.epsilon, rng);
        if (!r.ok()) return r.status();
        base[u] = *std::move(r);
      }
      break;
    case StrategyKind::kTsvd:
      for (int u = 0; u < n; ++u) {
        absl::StatusOr<Record> r = TsvdTruncate(records[u], spec.rank);
        if (!r.ok()) return r.status();
        base[u] = *std::move(r);
      }
      break;
    case StrategyKind::kGlobalAverage: {
      absl::StatusOr<Record> mean = AggregateGlobal(records);
      if (!mean.ok()) return mean.status();
      base.assign(n, *mean);
      out.group_of_user.assign(n, 0);
      out.group_sizes.assign(1, n);
      break;
    }
    case StrategyKind::kClusterAverage: {
      if (spec.multiplier < 1 || cohort.cluster_base_k < 1) {
        return absl::InvalidArgumentError(
            "cluster base k and multiplier must be >= 1");
      }
      if (static_cast<int>(cohort.profiles.size()) != n) {
        return absl::InvalidArgumentError("one profile per user required");
      }
      const int k = cohort.cluster_base_k * spec.multiplier;
      absl::StatusOr<ClusterAssignment> assignment =
          ClusterProfiles(cohort.profiles, k, cohort.clustering_seed);
      if (!assignment.ok()) return assignment.status();
      absl::StatusOr<ClusterMeans> means =
          AggregateClusters(records, assignment->labels, k);
      if (!means.ok()) return means.status();
      for (int u = 0; u < n; ++u) base[u] = means->means[assignment->labels[u]];
      out.group_of_user = assignment->labels;
      out.group_sizes = means->sizes;
      break;
    }
    case StrategyKind::kNearestNeighbor:
    case StrategyKind::kSecondNearestNeighbor: {
      if (static_cast<int>(cohort.profiles.size()) != n) {
        return absl::InvalidArgumentError("one profile per user required");
      }
      const int rank = spec.kind == StrategyKind::kNearestNeighbor ? 1 : 2;
      for (int u = 0; u < n; ++u) {
        absl::StatusOr<Record> r =
            NnRecord(cohort.profiles, u, records, rank);
        if (!r.ok()) return r.status();
        base[u] = *std::move(r);
      }
      break;
    }
  }

  out.served.reserve(n);
  for (int u = 0; u < n; ++u) {
    Record r = std::move(base[u]);
    if (spec.post_noise) {
      absl::StatusOr<Record> noisy =
          LaplacePerturb(r, weights, *spec.post_noise, rng);
      if (!noisy.ok()) return noisy.status();
      r = *std::move(noisy);
    }
    if (spec.post_rank) {
      absl::StatusOr<Record> low = TsvdTruncate(r, *spec.post_rank);
      if (!low.ok()) return low.status();
      r = *std::move(low);
    }
    if (!r.allFinite()) {
      return absl::InternalError(
          absl::StrFormat("non-finite record for user %d", u));
    }
    out.served.push_back(NormalizePipeline(r));
  }
  return out;
}

}  // namespace privbandit
