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

// User metadata profiles, a deterministic 2-D embedding and k-means.

#ifndef PRIVBANDIT_PROFILES_H_
#define PRIVBANDIT_PROFILES_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "privbandit/ingest.h"

namespace privbandit {

enum class ProfileSource { kHourly, kActivity, kAdjacency, kSynthetic };

std::string_view ProfileSourceName(ProfileSource source);

struct UserProfile {
  Eigen::VectorXd features;
  ProfileSource source = ProfileSource::kSynthetic;
  // Set when the user had no usable events and `features` is all zero.
  bool empty_source = false;
};

inline constexpr int kHoursPerDay = 24;

// 24 hourly intensities. Each interval between consecutive entries counts for
// the earlier entry's state; the state id is the intensity level. Per calendar
// day (timestamp / 86400) and hour the time-weighted mean intensity is taken,
// then hours are averaged over the days that cover them. Uncovered hours are 0.
UserProfile ProfileHourlyIntensity(std::span<const Event> events);

// [mean dwell per visit, extra scalars..., per-state visit share]. A visit is a
// maximal run of equal consecutive states before the session terminator. The
// first `scalar_count` slots are scalars: slot 0 is the mean dwell and
// `extra_scalars` fill the following slots (missing ones stay 0). Length is
// scalar_count + d.
absl::StatusOr<UserProfile> ProfileActivityFeatures(
    std::span<const Event> events, int d, int scalar_count = 1,
    std::span<const double> extra_scalars = {});

// Flattened m x m binary adjacency of consecutive activations a -> b, a != b.
// A terminator entry is not an activation.
absl::StatusOr<UserProfile> ProfileAdjacency(std::span<const Event> events,
                                             int m);

// Stacks profiles into an N x p matrix; lengths must agree.
absl::StatusOr<Eigen::MatrixXd> StackProfiles(
    std::span<const Eigen::VectorXd> profiles);

// Projection of the centered rows onto the top two principal axes, N x 2.
// Each column is signed so its largest-magnitude entry is positive; components
// with a vanishing singular value are all zero.
absl::StatusOr<Eigen::MatrixXd> Embed2d(const Eigen::MatrixXd& points);

struct ClusterAssignment {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x p
  int k = 0;
  std::vector<double> inertia_trace;  // after each Lloyd iteration
  int iterations = 0;
};

// Sum of squared distances from each point to its labeled centroid.
double Inertia(const Eigen::MatrixXd& points,
               const ClusterAssignment& assignment);

// k-means++ seeding followed by Lloyd iterations until labels stop changing
// or `max_iter` is reached. Emptied clusters take the point farthest from its
// centroid. Requires k <= number of distinct points.
absl::StatusOr<ClusterAssignment> KMeans(const Eigen::MatrixXd& points, int k,
                                         uint64_t seed, int max_iter = 300);

// Embed2d followed by KMeans.
absl::StatusOr<ClusterAssignment> ClusterProfiles(
    std::span<const Eigen::VectorXd> profiles, int k, uint64_t seed);

}  // namespace privbandit

#endif  // PRIVBANDIT_PROFILES_H_
