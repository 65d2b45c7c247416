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

#include "privbandit/ingest.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"
#include "privbandit/random.h"

namespace privbandit {
namespace {

absl::Status ValidateUserEvents(std::span<const Event> events, int states) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    const bool last = i + 1 == events.size();
    if (!std::isfinite(e.timestamp_s) || e.timestamp_s < 0.0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "user %s: invalid timestamp %g", e.user_id, e.timestamp_s));
    }
    if (i > 0 && !(e.timestamp_s > events[i - 1].timestamp_s)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "user %s: timestamps must strictly increase (%g after %g)",
          e.user_id, e.timestamp_s, events[i - 1].timestamp_s));
    }
    const bool terminator = e.state == kTerminatorState && last;
    if (!terminator && (e.state < 0 || e.state >= states)) {
      return absl::OutOfRangeError(absl::StrFormat(
          "user %s: state %d outside [0, %d)", e.user_id, e.state, states));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<EventLog> EventLog::Create(std::vector<Event> events,
                                          int states) {
  if (states < 1) return absl::InvalidArgumentError("states must be >= 1");
  EventLog log;
  log.states_ = states;
  for (Event& e : events) {
    std::string user = e.user_id;
    log.by_user_[user].push_back(std::move(e));
  }
  for (const auto& [user, entries] : log.by_user_) {
    if (absl::Status s = ValidateUserEvents(entries, states); !s.ok()) {
      return s;
    }
  }
  return log;
}

std::vector<std::string> EventLog::Users() const {
  std::vector<std::string> users;
  users.reserve(by_user_.size());
  for (const auto& [user, entries] : by_user_) users.push_back(user);
  return users;
}

absl::StatusOr<std::span<const Event>> EventLog::ForUser(
    std::string_view user) const {
  auto it = by_user_.find(user);
  if (it == by_user_.end()) {
    return absl::NotFoundError(
        absl::StrFormat("unknown user '%s'", std::string(user)));
  }
  return std::span<const Event>(it->second);
}

absl::StatusOr<Matrix> BuildRawMatrix(std::span<const Event> user_events,
                                      int states) {
  if (states < 1) return absl::InvalidArgumentError("states must be >= 1");
  if (absl::Status s = ValidateUserEvents(user_events, states); !s.ok()) {
    return s;
  }
  Matrix raw = Matrix::Zero(states, states);
  const std::size_t n = user_events.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Event& cur = user_events[i];
    const Event& next = user_events[i + 1];
    raw(cur.state, cur.state) += next.timestamp_s - cur.timestamp_s;
    // The final entry is the session terminator, not a visited state.
    if (i + 2 < n && next.state != cur.state) {
      raw(cur.state, next.state) += 1.0;
    }
  }
  return raw;
}

absl::StatusOr<Matrix> BuildRawMatrix(const EventLog& log,
                                      std::string_view user) {
  absl::StatusOr<std::span<const Event>> events = log.ForUser(user);
  if (!events.ok()) return events.status();
  return BuildRawMatrix(*events, log.states());
}

TransitionMatrix FinalizeMatrix(const Matrix& raw) {
  return TransitionMatrix::FromNonNegative(raw);
}

absl::StatusOr<SyntheticCohort> SynthCohort(const SynthOptions& options) {
  if (options.users < 2 || options.states < 2) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "synthetic cohort needs >= 2 users and >= 2 states, got %d and %d",
        options.users, options.states));
  }
  if (!(options.concentration > 0.0) || !(options.sharpness >= 0.0)) {
    return absl::InvalidArgumentError(
        "concentration must be positive and sharpness non-negative");
  }
  const int templates =
      options.templates > 0 ? options.templates
                            : std::max(2, options.users / 5);
  if (templates > options.users) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d templates for %d users", templates, options.users));
  }
  if (options.profile_dims < 1) {
    return absl::InvalidArgumentError("profile_dims must be >= 1");
  }
  const int d = options.states;
  Rng rng(DeriveSeed(options.seed, "synth"));

  SyntheticCohort cohort;
  for (int c = 0; c < templates; ++c) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        m(i, j) = std::pow(rng.Exponential(), options.sharpness);
      }
    }
    cohort.templates.push_back(TransitionMatrix::FromNonNegative(std::move(m)));
  }
  std::vector<Eigen::VectorXd> centers;
  for (int c = 0; c < templates; ++c) {
    Eigen::VectorXd center(options.profile_dims);
    for (int k = 0; k < options.profile_dims; ++k) center[k] = rng.Normal();
    centers.push_back(std::move(center));
  }
  const double exponent = 1.0 / options.concentration;
  for (int u = 0; u < options.users; ++u) {
    const int label = u % templates;
    Matrix m = cohort.templates[label].matrix();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        m(i, j) *= std::pow(rng.Exponential(), exponent);
      }
    }
    cohort.matrices.push_back(TransitionMatrix::FromNonNegative(std::move(m)));
    cohort.labels.push_back(label);
    Eigen::VectorXd profile = centers[label];
    for (int k = 0; k < options.profile_dims; ++k) {
      profile[k] += options.profile_spread * rng.Normal();
    }
    cohort.profiles.push_back(std::move(profile));
  }
  return cohort;
}

}  // namespace privbandit
