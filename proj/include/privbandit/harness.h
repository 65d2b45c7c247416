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

// Experiment orchestration: dataset presets, the JSON experiment config, the
// privacy/regret trade-off sweep and the ADS sweep.

#ifndef PRIVBANDIT_HARNESS_H_
#define PRIVBANDIT_HARNESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "privbandit/anonymize.h"
#include "privbandit/ingest.h"

namespace privbandit {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

inline constexpr std::string_view kResultHeader =
    "strategy,param,epsilon,rank,n_cells,deanon_prob,deanon_chance,ads,"
    "regret_mean,regret_stderr,runs,seed";
inline constexpr std::string_view kCurveHeader =
    "step,regret_mean,regret_stderr";

struct DatasetPreset {
  std::string name;
  int states = 0;
  int users = 0;
  int cluster_base_k = 0;
  int aux_cells = 0;      // trade-off sweeps
  double epsilon_hi = 0;  // noise grid is [0, epsilon_hi)
  std::vector<int> aux_grid;  // ADS sweeps
};

// "casas", "endomondo", "fitbit".
absl::StatusOr<DatasetPreset> FindDatasetPreset(std::string_view name);

struct ScalePreset {
  std::string name;
  int horizon = 0;
  int runs = 0;
};

// "desk" (1000 steps, 200 runs) or "full" (2500 steps, 500 runs).
absl::StatusOr<ScalePreset> FindScalePreset(std::string_view name);

// n evenly spaced points on [lo, hi), endpoint excluded.
std::vector<double> NoiseGrid(double lo, double hi, int points);
// d, d-1, ..., 1.
std::vector<int> RankGrid(int d);

enum class SweepAxis { kNoise, kRank, kFixed };

struct SweepStrategy {
  StrategySpec spec;
  // Value of the strategy column; defaults to the kind name.
  std::string label;
  SweepAxis axis = SweepAxis::kNoise;
};

enum class PriorKind { kUniform, kStationary };

struct ExperimentConfig {
  std::string preset;
  std::string scale;

  // Cohort: a synthetic draw or a manifest on disk.
  std::string cohort_source = "synthetic";
  SynthOptions synth;
  std::string manifest_path;

  std::vector<SweepStrategy> strategies;
  std::vector<double> epsilon_grid;
  std::vector<int> rank_grid;  // empty: d down to 1
  int aux_cells = 0;
  std::vector<int> aux_grid;

  int horizon = 0;
  int runs = 0;
  int attack_trials = 100;
  double alpha = 0.001;
  uint64_t base_seed = 0;
  int entropy_bins = 20;
  double entropy_floor = 1e-3;
  PriorKind prior = PriorKind::kUniform;
  int cluster_base_k = 0;
  std::string output;
};

// Reads the "experiment" object. Preset values fill unspecified fields; any
// unknown key or invalid value is an error.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const nlohmann::json& root);
absl::StatusOr<ExperimentConfig> ParseExperimentConfigText(
    std::string_view text);
// Fully resolved config, suitable for echoing next to results.
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);

// Cohort described by the config, with profiles. Synthetic cohorts use the
// generator's metadata profiles; manifest cohorts must ship a profile file
// when a strategy needs profiles.
absl::StatusOr<Cohort> BuildCohort(const ExperimentConfig& config);

struct ResultRow {
  std::string strategy;
  std::string param;
  double epsilon = 0.0;
  int rank = 0;  // 0 when the strategy has no rank
  int n_cells = 0;
  double deanon_prob = 0.0;
  double deanon_chance = 0.0;
  std::optional<double> ads;
  std::optional<double> regret_mean;
  std::optional<double> regret_stderr;
  int runs = 0;
  uint64_t seed = 0;
};

struct RegretSummary {
  std::vector<double> mean;
  std::vector<double> std_error;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<RegretSummary> curves;  // trade-off sweeps only, row-aligned
};

// Grid points of one strategy under the config: (spec, epsilon, rank).
struct GridPoint {
  StrategySpec spec;
  double epsilon = 0.0;
  int rank = 0;
};
absl::StatusOr<std::vector<GridPoint>> ExpandStrategy(
    const SweepStrategy& strategy, const ExperimentConfig& config, int d);

// Served matrix regret against each user's true matrix, averaged over users.
// User u uses base seed DeriveSeed(seed, "environment", u) for every strategy.
absl::StatusOr<RegretSummary> CohortRegret(
    std::span<const TransitionMatrix> truth,
    std::span<const TransitionMatrix> served, PriorKind prior, int horizon,
    int runs, uint64_t seed, int workers = 1);

absl::StatusOr<SweepResult> RunTradeoff(const ExperimentConfig& config,
                                        const Cohort& cohort, int workers);
absl::StatusOr<SweepResult> RunAdsSweep(const ExperimentConfig& config,
                                        const Cohort& cohort, int workers);

std::string ResultsToCsv(std::span<const ResultRow> rows);
std::string CurveToCsv(const RegretSummary& curve);

// Writes <output>, <output>.meta.json and, for trade-off sweeps,
// <output>_curves/row_NNNN.csv.
absl::Status WriteSweepOutputs(const ExperimentConfig& config,
                               const SweepResult& result,
                               std::string_view kind);

}  // namespace privbandit

#endif  // PRIVBANDIT_HARNESS_H_
