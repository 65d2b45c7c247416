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

// Non-stationary latent bandit environment, the model-based Thompson sampling
// (mTS) agent and regret accounting.
//
// The latent state S_t evolves under the environment's true transition
// matrix. The agent knows the reward model but plays with a possibly
// anonymized transition matrix: each step it samples a state B_t from its
// belief, plays the arm that is optimal for B_t, observes a Gaussian reward and
// propagates the belief through its own matrix.

#ifndef PRIVBANDIT_BANDIT_H_
#define PRIVBANDIT_BANDIT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "privbandit/random.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {

// "Hard" reward preset: one optimal arm per state, every other arm identical.
inline constexpr double kHardOptimalMean = 2.0;
inline constexpr double kHardSuboptimalMean = 1.05;
inline constexpr double kHardSigma = 2.0;

// Gaussian rewards: (arm, state) pays N(means(arm, state), sigma^2).
struct RewardModel {
  Matrix means;  // arms x states
  double sigma = kHardSigma;

  int arms() const { return static_cast<int>(means.rows()); }
  int states() const { return static_cast<int>(means.cols()); }
};

// Builds the hard preset. `optimal_arm_of_state[s]` is the arm with mean 2 in
// state s; the map must be injective and arms >= states.
absl::StatusOr<RewardModel> MakeHardRewardModel(
    int states, int arms, std::span<const int> optimal_arm_of_state);

// Hard preset with arms == states and the identity state->arm map.
RewardModel MakeHardRewardModel(int states);

// Probability vector over latent states.
using Belief = Eigen::VectorXd;

Belief UniformBelief(int states);
Belief PointBelief(int states, int state);
// Stationary distribution of `matrix` (least-squares solution of pi T = pi,
// sum(pi) = 1, clipped to non-negative and renormalized).
Belief StationaryBelief(const TransitionMatrix& matrix);
absl::Status CheckBelief(const Belief& belief, double tolerance = 1e-6);

// Draws the next state from row `state` by inverse CDF; one uniform draw.
int EnvStep(int state, const TransitionMatrix& matrix, Rng& rng);

double SampleReward(const RewardModel& model, int arm, int state, Rng& rng);

// argmax over arms of means(., state); ties go to the lowest arm id.
int OptimalArm(const RewardModel& model, int state);

struct ArmChoice {
  int arm = 0;
  int sampled_state = 0;  // B_t
};

// Samples B_t from `belief` (inverse CDF) and plays OptimalArm(model, B_t).
absl::StatusOr<ArmChoice> MtsSelectArm(const Belief& belief,
                                       const RewardModel& model, Rng& rng);

// Bayes update followed by one step of the agent's dynamics:
//   P_{t+1}(j) ∝ sum_s P_t(s) * T(s, j) * N(reward; means(arm, s), sigma^2).
// Evaluated in log space. If every state has zero posterior mass the uniform
// belief is returned.
absl::StatusOr<Belief> MtsUpdateBelief(const Belief& belief,
                                       const TransitionMatrix& matrix,
                                       const RewardModel& model, int arm,
                                       double reward);

struct RegretTrace {
  std::vector<double> per_step;    // mu(A*_t, S_t) - mu(A_t, S_t)
  std::vector<double> cumulative;  // running sums of per_step
  int belief_resets = 0;           // underflow fallbacks taken
};

// One episode of `horizon` steps. The initial state is drawn from `prior`,
// which also initializes the agent's belief. The environment moves with
// `env_matrix`; the agent updates with `agent_matrix`.
//
// `rng` seeds three private streams (environment, agent, reward), so the
// latent state trajectory is identical for every agent matrix under the same
// seed.
absl::StatusOr<RegretTrace> RunEpisode(const TransitionMatrix& env_matrix,
                                       const TransitionMatrix& agent_matrix,
                                       const RewardModel& model,
                                       const Belief& prior, int horizon,
                                       Rng& rng);

struct RegretCurve {
  std::vector<double> mean;       // mean cumulative regret per step
  std::vector<double> std_error;  // standard error per step
  int runs = 0;
  int belief_resets = 0;
};

// Seed of run `run` in BayesRegret.
uint64_t EpisodeSeed(uint64_t base_seed, int run);

// Averages `runs` independent episodes. Episode r uses EpisodeSeed(base_seed,
// r); the reduction is in ascending run order, so the result is bit-identical
// for any worker count.
absl::StatusOr<RegretCurve> BayesRegret(const TransitionMatrix& env_matrix,
                                        const TransitionMatrix& agent_matrix,
                                        const RewardModel& model,
                                        const Belief& prior, int horizon,
                                        int runs, uint64_t base_seed,
                                        int workers = 1);

}  // namespace privbandit

#endif  // PRIVBANDIT_BANDIT_H_
