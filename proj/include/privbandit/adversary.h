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

// Linkage attack: the adversary knows a few true cells of a victim's matrix
// and scores every released record by the share of those cells it reproduces
// within alpha.

#ifndef PRIVBANDIT_ADVERSARY_H_
#define PRIVBANDIT_ADVERSARY_H_

#include <cmath>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "privbandit/anonymize.h"
#include "privbandit/random.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {

inline constexpr double kDefaultAlpha = 0.001;
inline constexpr int kDefaultAttackTrials = 100;

struct AuxiliaryInfo {
  std::vector<int> cells;  // distinct row-major flat indices
  std::vector<double> values;
};

// n_cells distinct cells chosen uniformly without replacement.
absl::StatusOr<AuxiliaryInfo> SampleAux(const TransitionMatrix& record,
                                        int n_cells, Rng& rng);

// 1 iff |a - b| < alpha.
inline int Sim(double a, double b, double alpha) {
  return std::fabs(a - b) < alpha ? 1 : 0;
}

absl::StatusOr<double> Score(const AuxiliaryInfo& aux, const Matrix& candidate,
                             double alpha);

struct MatchOutcome {
  int matched = -1;        // index into the candidate list
  int match_set_size = 0;  // |D'|
  bool success = false;
  double credit = 0.0;
};

// Scores every candidate and picks uniformly among the top scorers.
// `success` and `credit` are left for the caller.
absl::StatusOr<MatchOutcome> ScoreboardMatch(
    const AuxiliaryInfo& aux, std::span<const TransitionMatrix> candidates,
    double alpha, Rng& rng);

struct DeanonEstimate {
  double probability = 0.0;
  // Success rate of guessing a released record uniformly at random.
  double chance = 0.0;
  int trials = 0;
  double mean_match_set = 0.0;
};

// Chance baseline for N users: a uniform guess over the released set scores
// 1/N for per-user, cluster and global releases alike.
double ChanceBaseline(int users);

// Each trial draws a victim uniformly (with replacement), samples aux from
// the victim's true matrix and matches against the released set, in which
// identical records within a group are collapsed to one entry. A match into
// the victim's group is credited 1 / |group|. Trial t uses its own stream
// seeded from one draw of `rng`.
absl::StatusOr<DeanonEstimate> DeanonProbability(
    std::span<const TransitionMatrix> truth, const AnonymizedSet& released,
    int n_cells, double alpha, int trials, Rng& rng);

}  // namespace privbandit

#endif  // PRIVBANDIT_ADVERSARY_H_
