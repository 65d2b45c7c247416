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

#include "privbandit/bandit.h"

#include <cmath>
#include <limits>
#include <set>

#include "absl/strings/str_format.h"
#include "privbandit/parallel.h"

namespace privbandit {
namespace {

// Inverse CDF over n probabilities given by prob(i). Falls back to the last
// index with positive mass when rounding leaves u above the accumulated total.
template <typename Prob>
int SampleIndexBy(int n, double u, Prob prob) {
  double cumulative = 0.0;
  int last_positive = 0;
  for (int i = 0; i < n; ++i) {
    const double p = prob(i);
    if (p <= 0.0) continue;
    cumulative += p;
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

int SampleIndex(const double* probs, int n, double u) {
  return SampleIndexBy(n, u, [probs](int i) { return probs[i]; });
}

double LogLikelihood(double reward, double mean, double sigma) {
  if (sigma == 0.0) {
    return reward == mean ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double z = (reward - mean) / sigma;
  return -0.5 * z * z;
}

// In-place belief propagation shared by MtsUpdateBelief and RunEpisode.
// Returns false when the posterior degenerated and was reset to uniform.
bool PropagateBelief(Belief& belief, const Matrix& transition,
                     const RewardModel& model, int arm, double reward,
                     Eigen::VectorXd& weights) {
  const int d = static_cast<int>(belief.size());
  weights.resize(d);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < d; ++s) {
    const double p = belief[s];
    const double lw =
        p > 0.0 ? std::log(p) + LogLikelihood(reward, model.means(arm, s),
                                              model.sigma)
                : -std::numeric_limits<double>::infinity();
    weights[s] = lw;
    if (lw > max_log) max_log = lw;
  }
  if (!std::isfinite(max_log)) {
    belief.setConstant(1.0 / d);
    return false;
  }
  for (int s = 0; s < d; ++s) weights[s] = std::exp(weights[s] - max_log);
  belief.noalias() = transition.transpose() * weights;
  const double total = belief.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    belief.setConstant(1.0 / d);
    return false;
  }
  belief /= total;
  return true;
}

}  // namespace

absl::StatusOr<RewardModel> MakeHardRewardModel(
    int states, int arms, std::span<const int> optimal_arm_of_state) {
  if (states < 1) {
    return absl::InvalidArgumentError("state count must be positive");
  }
  if (arms < states) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "hard reward model needs at least as many arms (%d) as states (%d)",
        arms, states));
  }
  if (static_cast<int>(optimal_arm_of_state.size()) != states) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "optimal-arm map has %d entries for %d states",
        optimal_arm_of_state.size(), states));
  }
  std::set<int> used;
  for (int arm : optimal_arm_of_state) {
    if (arm < 0 || arm >= arms) {
      return absl::InvalidArgumentError(
          absl::StrFormat("optimal arm %d out of range [0, %d)", arm, arms));
    }
    if (!used.insert(arm).second) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "optimal-arm map is not injective: arm %d repeats", arm));
    }
  }
  RewardModel model;
  model.means = Matrix::Constant(arms, states, kHardSuboptimalMean);
  model.sigma = kHardSigma;
  for (int s = 0; s < states; ++s) {
    model.means(optimal_arm_of_state[s], s) = kHardOptimalMean;
  }
  return model;
}

RewardModel MakeHardRewardModel(int states) {
  RewardModel model;
  model.means = Matrix::Constant(states, states, kHardSuboptimalMean);
  model.means.diagonal().setConstant(kHardOptimalMean);
  model.sigma = kHardSigma;
  return model;
}

Belief UniformBelief(int states) {
  return Belief::Constant(states, 1.0 / states);
}

Belief PointBelief(int states, int state) {
  Belief b = Belief::Zero(states);
  b[state] = 1.0;
  return b;
}

Belief StationaryBelief(const TransitionMatrix& matrix) {
  const int d = matrix.dim();
  // Stack (T^T - I) pi = 0 with the normalization row 1^T pi = 1.
  Matrix system(d + 1, d);
  system.topRows(d) = matrix.matrix().transpose() - Matrix::Identity(d, d);
  system.row(d).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
  rhs[d] = 1.0;
  Belief pi = system.colPivHouseholderQr().solve(rhs);
  pi = pi.cwiseMax(0.0);
  const double total = pi.sum();
  if (!(total > 0.0)) return UniformBelief(d);
  return pi / total;
}

absl::Status CheckBelief(const Belief& belief, double tolerance) {
  if (belief.size() == 0) {
    return absl::InvalidArgumentError("belief is empty");
  }
  for (Eigen::Index i = 0; i < belief.size(); ++i) {
    if (!std::isfinite(belief[i]) || belief[i] < 0.0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("belief entry %d = %g is not a probability", i,
                          belief[i]));
    }
  }
  const double total = belief.sum();
  if (std::fabs(total - 1.0) > tolerance) {
    return absl::InvalidArgumentError(
        absl::StrFormat("belief sums to %.12g", total));
  }
  return absl::OkStatus();
}

int EnvStep(int state, const TransitionMatrix& matrix, Rng& rng) {
  const Matrix& m = matrix.matrix();
  return SampleIndexBy(matrix.dim(), rng.Uniform(),
                       [&m, state](int j) { return m(state, j); });
}

double SampleReward(const RewardModel& model, int arm, int state, Rng& rng) {
  return model.means(arm, state) + model.sigma * rng.Normal();
}

int OptimalArm(const RewardModel& model, int state) {
  int best = 0;
  for (int a = 1; a < model.arms(); ++a) {
    if (model.means(a, state) > model.means(best, state)) best = a;
  }
  return best;
}

absl::StatusOr<ArmChoice> MtsSelectArm(const Belief& belief,
                                       const RewardModel& model, Rng& rng) {
  if (absl::Status s = CheckBelief(belief); !s.ok()) return s;
  if (belief.size() != model.states()) {
    return absl::InvalidArgumentError("belief and reward model disagree on d");
  }
  ArmChoice choice;
  choice.sampled_state = SampleIndex(
      belief.data(), static_cast<int>(belief.size()), rng.Uniform());
  choice.arm = OptimalArm(model, choice.sampled_state);
  return choice;
}

absl::StatusOr<Belief> MtsUpdateBelief(const Belief& belief,
                                       const TransitionMatrix& matrix,
                                       const RewardModel& model, int arm,
                                       double reward) {
  if (!std::isfinite(reward)) {
    return absl::InvalidArgumentError("reward is not finite");
  }
  if (absl::Status s = CheckBelief(belief); !s.ok()) return s;
  if (belief.size() != matrix.dim() || model.states() != matrix.dim()) {
    return absl::InvalidArgumentError(
        "belief, transition matrix and reward model disagree on d");
  }
  if (arm < 0 || arm >= model.arms()) {
    return absl::OutOfRangeError(absl::StrFormat("arm %d out of range", arm));
  }
  Belief next = belief;
  Eigen::VectorXd scratch;
  PropagateBelief(next, matrix.matrix(), model, arm, reward, scratch);
  return next;
}

absl::StatusOr<RegretTrace> RunEpisode(const TransitionMatrix& env_matrix,
                                       const TransitionMatrix& agent_matrix,
                                       const RewardModel& model,
                                       const Belief& prior, int horizon,
                                       Rng& rng) {
  const int d = env_matrix.dim();
  if (agent_matrix.dim() != d || model.states() != d || prior.size() != d) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "dimension mismatch: env %d, agent %d, reward model %d, prior %d", d,
        agent_matrix.dim(), model.states(), prior.size()));
  }
  if (horizon < 0) {
    return absl::InvalidArgumentError("horizon must be non-negative");
  }
  if (absl::Status s = CheckBelief(prior); !s.ok()) return s;

  Rng env_rng(rng.NextU64());
  Rng agent_rng(rng.NextU64());
  Rng reward_rng(rng.NextU64());

  std::vector<int> optimal(d);
  std::vector<double> optimal_mean(d);
  for (int s = 0; s < d; ++s) {
    optimal[s] = OptimalArm(model, s);
    optimal_mean[s] = model.means(optimal[s], s);
  }

  RegretTrace trace;
  trace.per_step.reserve(horizon);
  trace.cumulative.reserve(horizon);
  Belief belief = prior;
  Eigen::VectorXd scratch(d);
  int state = SampleIndex(prior.data(), d, env_rng.Uniform());
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const int sampled = SampleIndex(belief.data(), d, agent_rng.Uniform());
    const int arm = optimal[sampled];
    const double reward = SampleReward(model, arm, state, reward_rng);
    const double regret = optimal_mean[state] - model.means(arm, state);
    total += regret;
    trace.per_step.push_back(regret);
    trace.cumulative.push_back(total);
    if (!PropagateBelief(belief, agent_matrix.matrix(), model, arm, reward,
                         scratch)) {
      ++trace.belief_resets;
    }
    state = EnvStep(state, env_matrix, env_rng);
  }
  return trace;
}

uint64_t EpisodeSeed(uint64_t base_seed, int run) {
  return DeriveSeed(base_seed, "episode", static_cast<uint64_t>(run));
}

absl::StatusOr<RegretCurve> BayesRegret(const TransitionMatrix& env_matrix,
                                        const TransitionMatrix& agent_matrix,
                                        const RewardModel& model,
                                        const Belief& prior, int horizon,
                                        int runs, uint64_t base_seed,
                                        int workers) {
  if (runs < 1) return absl::InvalidArgumentError("runs must be >= 1");
  std::vector<absl::StatusOr<RegretTrace>> traces(runs);
  ParallelFor(static_cast<std::size_t>(runs), workers, [&](std::size_t r) {
    Rng rng(EpisodeSeed(base_seed, static_cast<int>(r)));
    traces[r] =
        RunEpisode(env_matrix, agent_matrix, model, prior, horizon, rng);
  });
  RegretCurve curve;
  curve.runs = runs;
  curve.mean.assign(horizon, 0.0);
  curve.std_error.assign(horizon, 0.0);
  for (const auto& trace : traces) {
    if (!trace.ok()) return trace.status();
    curve.belief_resets += trace->belief_resets;
    for (int t = 0; t < horizon; ++t) curve.mean[t] += trace->cumulative[t];
  }
  for (int t = 0; t < horizon; ++t) curve.mean[t] /= runs;
  if (runs > 1) {
    for (int t = 0; t < horizon; ++t) {
      double ss = 0.0;
      for (const auto& trace : traces) {
        const double dev = trace->cumulative[t] - curve.mean[t];
        ss += dev * dev;
      }
      curve.std_error[t] = std::sqrt(ss / (runs - 1)) / std::sqrt(runs);
    }
  }
  return curve;
}

}  // namespace privbandit
