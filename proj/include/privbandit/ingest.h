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

#ifndef PRIVBANDIT_INGEST_H_
#define PRIVBANDIT_INGEST_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {

// State id of a session terminator row ("end" in event-log CSVs). Allowed
// only as a user's final entry.
inline constexpr int kTerminatorState = -1;

struct Event {
  std::string user_id;
  double timestamp_s = 0.0;
  int state = 0;
};

// Events grouped by user, each user's entries strictly increasing in time.
//
// A user's final entry closes the session: the interval between consecutive
// entries belongs to the earlier entry's state, and the final entry's own
// state carries no dwell.
class EventLog {
 public:
  // Entries keep their relative order within each user. Rejects decreasing
  // or repeated timestamps, negative or non-finite timestamps, state ids
  // outside [0, states), and terminators anywhere but the final position.
  static absl::StatusOr<EventLog> Create(std::vector<Event> events,
                                         int states);

  int states() const { return states_; }
  // Sorted user ids.
  std::vector<std::string> Users() const;
  absl::StatusOr<std::span<const Event>> ForUser(std::string_view user) const;

 private:
  EventLog() = default;

  int states_ = 0;
  std::map<std::string, std::vector<Event>, std::less<>> by_user_;
};

// Raw counts for one user's events: diag(s) = seconds spent in s, (s, s') =
// number of observed s -> s' transitions for s != s'. Self-transitions add
// dwell only. An empty span yields the zero matrix.
absl::StatusOr<Matrix> BuildRawMatrix(std::span<const Event> user_events,
                                      int states);
absl::StatusOr<Matrix> BuildRawMatrix(const EventLog& log,
                                      std::string_view user);

// Row-normalizes a raw count matrix; rows without observations (missing
// states) become uniform.
TransitionMatrix FinalizeMatrix(const Matrix& raw);

struct SynthOptions {
  int users = 30;
  int states = 41;
  // Within-cluster closeness: user rows are template rows multiplied by
  // Exp(1)^(1 / concentration) and renormalized, so users converge to their
  // template as concentration grows.
  double concentration = 4.0;
  // Number of cluster templates; 0 picks max(2, users / 5).
  int templates = 0;
  // Template rows are Exp(1)^sharpness, normalized. Larger is peakier.
  double sharpness = 3.0;
  // Synthetic metadata profile: a per-template center in R^profile_dims plus
  // N(0, profile_spread^2) per user.
  int profile_dims = 8;
  double profile_spread = 0.15;
  uint64_t seed = 0;
};

struct SyntheticCohort {
  std::vector<TransitionMatrix> matrices;
  std::vector<int> labels;  // ground-truth template per user
  std::vector<TransitionMatrix> templates;
  std::vector<Eigen::VectorXd> profiles;
};

absl::StatusOr<SyntheticCohort> SynthCohort(const SynthOptions& options);

}  // namespace privbandit

#endif  // PRIVBANDIT_INGEST_H_
