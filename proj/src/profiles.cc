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

#include "privbandit/profiles.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "absl/strings/str_format.h"
#include "privbandit/random.h"

namespace privbandit {
namespace {

constexpr double kSecondsPerHour = 3600.0;
constexpr double kSecondsPerDay = 86400.0;

struct HourCell {
  double weighted = 0.0;  // seconds * state
  double seconds = 0.0;
};

double SquaredDistance(const Eigen::MatrixXd& points, int i,
                       const Eigen::MatrixXd& centers, int c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

int NearestCenter(const Eigen::MatrixXd& points, int i,
                  const Eigen::MatrixXd& centers) {
  int best = 0;
  double best_d = SquaredDistance(points, i, centers, 0);
  for (int c = 1; c < centers.rows(); ++c) {
    const double dist = SquaredDistance(points, i, centers, c);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

int CountDistinctRows(const Eigen::MatrixXd& points) {
  std::vector<std::vector<double>> rows;
  rows.reserve(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::vector<double>& row = rows.emplace_back(points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) row[j] = points(i, j);
  }
  std::sort(rows.begin(), rows.end());
  return static_cast<int>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

void UpdateCentroids(const Eigen::MatrixXd& points, ClusterAssignment& a) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(a.k, points.cols());
  std::vector<int> counts(a.k, 0);
  for (int i = 0; i < points.rows(); ++i) {
    sums.row(a.labels[i]) += points.row(i);
    ++counts[a.labels[i]];
  }
  for (int c = 0; c < a.k; ++c) {
    if (counts[c] > 0) a.centroids.row(c) = sums.row(c) / counts[c];
  }
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
void RepairEmptyClusters(const Eigen::MatrixXd& points, ClusterAssignment& a) {
  std::vector<int> counts(a.k, 0);
  for (int label : a.labels) ++counts[label];
  for (int c = 0; c < a.k; ++c) {
    if (counts[c] > 0) continue;
    int far = -1;
    double far_d = -1.0;
    for (int i = 0; i < points.rows(); ++i) {
      if (counts[a.labels[i]] < 2) continue;
      const double dist = SquaredDistance(points, i, a.centroids, a.labels[i]);
      if (dist > far_d) {
        far_d = dist;
        far = i;
      }
    }
    if (far < 0) return;
    --counts[a.labels[far]];
    a.labels[far] = c;
    counts[c] = 1;
    a.centroids.row(c) = points.row(far);
  }
}

}  // namespace

std::string_view ProfileSourceName(ProfileSource source) {
  switch (source) {
    case ProfileSource::kHourly:
      return "hourly";
    case ProfileSource::kActivity:
      return "activity";
    case ProfileSource::kAdjacency:
      return "adjacency";
    case ProfileSource::kSynthetic:
      return "synthetic";
  }
  return "unknown";
}

UserProfile ProfileHourlyIntensity(std::span<const Event> events) {
  UserProfile profile;
  profile.source = ProfileSource::kHourly;
  profile.features = Eigen::VectorXd::Zero(kHoursPerDay);
  std::map<int64_t, std::array<HourCell, kHoursPerDay>> days;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const double level = events[i].state;
    double t = events[i].timestamp_s;
    const double end = events[i + 1].timestamp_s;
    while (t < end) {
      const double day_start = std::floor(t / kSecondsPerDay) * kSecondsPerDay;
      const int hour = std::min(
          kHoursPerDay - 1,
          static_cast<int>((t - day_start) / kSecondsPerHour));
      const double hour_end = day_start + (hour + 1) * kSecondsPerHour;
      const double stop = std::min(end, hour_end);
      HourCell& cell =
          days[static_cast<int64_t>(day_start / kSecondsPerDay)][hour];
      cell.weighted += (stop - t) * level;
      cell.seconds += stop - t;
      t = stop;
    }
  }
  if (days.empty()) {
    profile.empty_source = true;
    return profile;
  }
  std::array<int, kHoursPerDay> covered{};
  for (const auto& [day, hours] : days) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      if (hours[h].seconds <= 0.0) continue;
      profile.features[h] += hours[h].weighted / hours[h].seconds;
      ++covered[h];
    }
  }
  for (int h = 0; h < kHoursPerDay; ++h) {
    if (covered[h] > 0) profile.features[h] /= covered[h];
  }
  return profile;
}

absl::StatusOr<UserProfile> ProfileActivityFeatures(
    std::span<const Event> events, int d, int scalar_count,
    std::span<const double> extra_scalars) {
  if (d < 1 || scalar_count < 1) {
    return absl::InvalidArgumentError("need d >= 1 and scalar_count >= 1");
  }
  if (static_cast<int>(extra_scalars.size()) > scalar_count - 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d extra scalars do not fit %d scalar slots", extra_scalars.size(),
        scalar_count));
  }
  UserProfile profile;
  profile.source = ProfileSource::kActivity;
  profile.features = Eigen::VectorXd::Zero(scalar_count + d);
  for (std::size_t i = 0; i < extra_scalars.size(); ++i) {
    profile.features[1 + i] = extra_scalars[i];
  }
  int visits = 0;
  double dwell = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const int s = events[i].state;
    if (s < 0 || s >= d) {
      return absl::OutOfRangeError(
          absl::StrFormat("state %d outside [0, %d)", s, d));
    }
    dwell += events[i + 1].timestamp_s - events[i].timestamp_s;
    if (i == 0 || events[i - 1].state != s) {
      ++visits;
      profile.features[scalar_count + s] += 1.0;
    }
  }
  if (visits == 0) {
    profile.empty_source = true;
    return profile;
  }
  profile.features[0] = dwell / visits;
  profile.features.tail(d) /= visits;
  return profile;
}

absl::StatusOr<UserProfile> ProfileAdjacency(std::span<const Event> events,
                                             int m) {
  if (m < 1) return absl::InvalidArgumentError("m must be >= 1");
  UserProfile profile;
  profile.source = ProfileSource::kAdjacency;
  profile.features = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * m);
  int previous = -1;
  int activations = 0;
  for (const Event& e : events) {
    if (e.state == kTerminatorState) continue;
    if (e.state < 0 || e.state >= m) {
      return absl::OutOfRangeError(
          absl::StrFormat("sensor %d outside [0, %d)", e.state, m));
    }
    if (previous >= 0 && previous != e.state) {
      profile.features[FlatCell(previous, e.state, m)] = 1.0;
    }
    previous = e.state;
    ++activations;
  }
  profile.empty_source = activations == 0;
  return profile;
}

absl::StatusOr<Eigen::MatrixXd> StackProfiles(
    std::span<const Eigen::VectorXd> profiles) {
  if (profiles.empty()) return absl::InvalidArgumentError("no profiles");
  const Eigen::Index p = profiles.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(profiles.size()), p);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (profiles[i].size() != p) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "profile %d has length %d, expected %d", i, profiles[i].size(), p));
    }
    if (!profiles[i].allFinite()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("profile %d has non-finite entries", i));
    }
    out.row(static_cast<Eigen::Index>(i)) = profiles[i].transpose();
  }
  return out;
}

absl::StatusOr<Eigen::MatrixXd> Embed2d(const Eigen::MatrixXd& points) {
  if (points.rows() < 2) {
    return absl::InvalidArgumentError("embedding needs at least two profiles");
  }
  if (points.cols() < 1) return absl::InvalidArgumentError("empty profiles");
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff =
      1e-12 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0) *
      static_cast<double>(std::max(points.rows(), points.cols()));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), 2);
  for (int c = 0; c < 2 && c < sv.size(); ++c) {
    if (sv[c] <= cutoff) continue;
    out.col(c) = centered * svd.matrixV().col(c);
    Eigen::Index arg = 0;
    out.col(c).cwiseAbs().maxCoeff(&arg);
    if (out(arg, c) < 0.0) out.col(c) = -out.col(c);
  }
  return out;
}

double Inertia(const Eigen::MatrixXd& points,
               const ClusterAssignment& assignment) {
  double total = 0.0;
  for (int i = 0; i < points.rows(); ++i) {
    total += SquaredDistance(points, i, assignment.centroids,
                             assignment.labels[i]);
  }
  return total;
}

absl::StatusOr<ClusterAssignment> KMeans(const Eigen::MatrixXd& points, int k,
                                         uint64_t seed, int max_iter) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("k = %d outside [1, %d]", k, n));
  }
  if (max_iter < 1) return absl::InvalidArgumentError("max_iter must be >= 1");
  if (!points.allFinite()) {
    return absl::InvalidArgumentError("points have non-finite entries");
  }
  const int distinct = CountDistinctRows(points);
  if (k > distinct) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "k = %d exceeds the %d distinct points", k, distinct));
  }

  Rng rng(seed);
  ClusterAssignment a;
  a.k = k;
  a.centroids.resize(k, points.cols());
  a.centroids.row(0) =
      points.row(static_cast<Eigen::Index>(rng.UniformIndex(n)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], SquaredDistance(points, i,
                                                        a.centroids, c - 1));
      total += nearest[i];
    }
    const double u = rng.Uniform() * total;
    double cumulative = 0.0;
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      cumulative += nearest[i];
      pick = i;
      if (u < cumulative) break;
    }
    a.centroids.row(c) = points.row(pick);
  }

  a.labels.assign(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int c = NearestCenter(points, i, a.centroids);
      if (c != a.labels[i]) {
        a.labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    RepairEmptyClusters(points, a);
    UpdateCentroids(points, a);
    a.inertia_trace.push_back(Inertia(points, a));
    a.iterations = it + 1;
  }
  return a;
}

absl::StatusOr<ClusterAssignment> ClusterProfiles(
    std::span<const Eigen::VectorXd> profiles, int k, uint64_t seed) {
  absl::StatusOr<Eigen::MatrixXd> stacked = StackProfiles(profiles);
  if (!stacked.ok()) return stacked.status();
  absl::StatusOr<Eigen::MatrixXd> embedded = Embed2d(*stacked);
  if (!embedded.ok()) return embedded.status();
  return KMeans(*embedded, k, seed);
}

}  // namespace privbandit
