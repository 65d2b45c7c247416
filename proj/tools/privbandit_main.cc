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

// privbandit: command-line front end for cohort construction, anonymization,
// attacks, bandit simulation and sweeps.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "privbandit/adversary.h"
#include "privbandit/anonymize.h"
#include "privbandit/bandit.h"
#include "privbandit/harness.h"
#include "privbandit/ingest.h"
#include "privbandit/io.h"
#include "privbandit/parallel.h"
#include "privbandit/privacy_metrics.h"
#include "privbandit/profiles.h"
#include "privbandit/random.h"

namespace privbandit {
namespace {

namespace fs = std::filesystem;

std::string UserId(int u) { return absl::StrFormat("u%03d", u); }

absl::Status Synth(int users, int states, uint64_t seed, double concentration,
                   int templates, double sharpness, const std::string& out) {
  SynthOptions options;
  options.users = users;
  options.states = states;
  options.seed = seed;
  options.concentration = concentration;
  options.templates = templates;
  options.sharpness = sharpness;
  absl::StatusOr<SyntheticCohort> cohort = SynthCohort(options);
  if (!cohort.ok()) return cohort.status();
  std::vector<std::string> ids;
  for (int u = 0; u < users; ++u) ids.push_back(UserId(u));
  return SaveCohort(out, ids, cohort->matrices, cohort->profiles,
                    cohort->labels, {},
                    absl::StrFormat("synthetic users=%d states=%d seed=%d",
                                    users, states, seed));
}

absl::StatusOr<UserProfile> ProfileFor(std::span<const Event> events,
                                       const std::string& kind, int states,
                                       int scalars) {
  if (kind == "hourly") return ProfileHourlyIntensity(events);
  if (kind == "activity") {
    return ProfileActivityFeatures(events, states, scalars);
  }
  if (kind == "adjacency") return ProfileAdjacency(events, states);
  return absl::InvalidArgumentError(absl::StrFormat(
      "profile kind must be hourly, activity or adjacency, got '%s'", kind));
}

absl::StatusOr<ProfileTable> BuildProfiles(const EventLog& log,
                                           const std::string& kind,
                                           int scalars) {
  ProfileTable table;
  for (const std::string& user : log.Users()) {
    absl::StatusOr<std::span<const Event>> events = log.ForUser(user);
    if (!events.ok()) return events.status();
    absl::StatusOr<UserProfile> p =
        ProfileFor(*events, kind, log.states(), scalars);
    if (!p.ok()) return p.status();
    if (p->empty_source) {
      std::cerr << "warning: user " << user << " has no usable events\n";
    }
    table.user_ids.push_back(user);
    table.features.push_back(p->features);
  }
  return table;
}

absl::StatusOr<EventLog> LoadLog(const std::string& path, int states) {
  absl::StatusOr<std::vector<Event>> events = ReadEventCsv(path);
  if (!events.ok()) return events.status();
  return EventLog::Create(*std::move(events), states);
}

absl::Status Ingest(const std::string& events_path, int states,
                    const std::string& profile_kind, int scalars,
                    const std::string& out) {
  absl::StatusOr<EventLog> log = LoadLog(events_path, states);
  if (!log.ok()) return log.status();
  std::vector<std::string> ids = log->Users();
  std::vector<TransitionMatrix> matrices;
  for (const std::string& user : ids) {
    absl::StatusOr<Matrix> raw = BuildRawMatrix(*log, user);
    if (!raw.ok()) return raw.status();
    matrices.push_back(FinalizeMatrix(*raw));
  }
  std::vector<Eigen::VectorXd> profiles;
  if (profile_kind != "none") {
    absl::StatusOr<ProfileTable> table =
        BuildProfiles(*log, profile_kind, scalars);
    if (!table.ok()) return table.status();
    profiles = std::move(table->features);
  }
  return SaveCohort(out, ids, matrices, profiles, {}, {},
                    absl::StrFormat("ingested from %s", events_path));
}

absl::Status Profiles(const std::string& events_path, int states,
                      const std::string& kind, int scalars,
                      const std::string& out) {
  absl::StatusOr<EventLog> log = LoadLog(events_path, states);
  if (!log.ok()) return log.status();
  absl::StatusOr<ProfileTable> table = BuildProfiles(*log, kind, scalars);
  if (!table.ok()) return table.status();
  return WriteFile(out, ProfilesToCsv(*table));
}

absl::Status Cluster(const std::string& profiles_path, int k, uint64_t seed,
                     const std::string& out) {
  absl::StatusOr<std::string> text = ReadFile(profiles_path);
  if (!text.ok()) return text.status();
  absl::StatusOr<ProfileTable> table = ParseProfilesCsv(*text);
  if (!table.ok()) return table.status();
  absl::StatusOr<Eigen::MatrixXd> stacked = StackProfiles(table->features);
  if (!stacked.ok()) return stacked.status();
  absl::StatusOr<Eigen::MatrixXd> embedded = Embed2d(*stacked);
  if (!embedded.ok()) return embedded.status();
  absl::StatusOr<ClusterAssignment> a = KMeans(*embedded, k, seed);
  if (!a.ok()) return a.status();
  std::string csv = "user_id,cluster,x,y\n";
  for (std::size_t u = 0; u < table->user_ids.size(); ++u) {
    const auto i = static_cast<Eigen::Index>(u);
    csv += absl::StrFormat("%s,%d,%s,%s\n", CsvField(table->user_ids[u]),
                           a->labels[u], FormatDouble((*embedded)(i, 0)),
                           FormatDouble((*embedded)(i, 1)));
  }
  return WriteFile(out, csv);
}

struct AnonymizeArgs {
  std::string manifest;
  std::string strategy = "none";
  double epsilon = 0.0;
  int rank = 0;
  int multiplier = 1;
  double post_noise = -1.0;
  int post_rank = 0;
  int base_k = 7;
  uint64_t seed = 0;
  int bins = kDefaultEntropyBins;
  double floor = kDefaultEntropyFloor;
  std::string out;
};

absl::Status Anonymize(const AnonymizeArgs& args) {
  absl::StatusOr<LoadedCohort> loaded = LoadCohort(args.manifest);
  if (!loaded.ok()) return loaded.status();
  absl::StatusOr<StrategyKind> kind = ParseStrategyKind(args.strategy);
  if (!kind.ok()) return kind.status();
  StrategySpec spec;
  spec.kind = *kind;
  spec.epsilon = args.epsilon;
  spec.rank = args.rank;
  spec.multiplier = args.multiplier;
  if (args.post_noise >= 0.0) spec.post_noise = args.post_noise;
  if (args.post_rank > 0) spec.post_rank = args.post_rank;

  Cohort cohort;
  cohort.matrices = loaded->matrices;
  cohort.profiles = loaded->profiles;
  cohort.cluster_base_k = args.base_k;
  cohort.clustering_seed = DeriveSeed(args.seed, "clustering");
  const std::vector<Record> records = ToRecords(cohort.matrices);
  absl::StatusOr<WeightVector> weights =
      EntropyWeights(records, args.bins, args.floor);
  if (!weights.ok()) return weights.status();
  Rng rng(DeriveSeed(args.seed, "noise"));
  absl::StatusOr<AnonymizedSet> released =
      ApplyStrategy(cohort, spec, *weights, rng);
  if (!released.ok()) return released.status();
  return SaveCohort(args.out, loaded->manifest.user_ids, released->served, {},
                    {}, released->group_of_user,
                    absl::StrFormat("anonymized: %s", DescribeStrategy(spec)));
}

absl::Status Attack(const std::string& truth_path,
                    const std::string& released_path, int cells, double alpha,
                    int trials, uint64_t seed, const std::string& out) {
  absl::StatusOr<LoadedCohort> truth = LoadCohort(truth_path);
  if (!truth.ok()) return truth.status();
  absl::StatusOr<LoadedCohort> released = LoadCohort(released_path);
  if (!released.ok()) return released.status();
  if (released->manifest.user_ids != truth->manifest.user_ids) {
    return absl::InvalidArgumentError(
        "released cohort must list the same users in the same order");
  }
  AnonymizedSet set;
  set.served = released->matrices;
  if (released->manifest.groups.empty()) {
    for (std::size_t u = 0; u < set.served.size(); ++u) {
      set.group_of_user.push_back(static_cast<int>(u));
    }
  } else {
    set.group_of_user = released->manifest.groups;
  }
  int groups = 0;
  for (int g : set.group_of_user) groups = std::max(groups, g + 1);
  set.group_sizes.assign(groups, 0);
  for (int g : set.group_of_user) ++set.group_sizes[g];
  Rng rng(DeriveSeed(seed, "attack"));
  absl::StatusOr<DeanonEstimate> estimate = DeanonProbability(
      truth->matrices, set, cells, alpha, trials, rng);
  if (!estimate.ok()) return estimate.status();
  const std::string csv = absl::StrFormat(
      "n_cells,alpha,trials,deanon_prob,deanon_chance,mean_match_set,seed\n"
      "%d,%s,%d,%s,%s,%s,%d\n",
      cells, FormatDouble(alpha), trials, FormatDouble(estimate->probability),
      FormatDouble(estimate->chance), FormatDouble(estimate->mean_match_set),
      seed);
  if (out.empty()) {
    std::cout << csv;
    return absl::OkStatus();
  }
  return WriteFile(out, csv);
}

absl::Status Simulate(const std::string& env_path,
                      const std::string& agent_path, int horizon, int runs,
                      uint64_t seed, const std::string& prior_name,
                      const std::string& out) {
  absl::StatusOr<TransitionMatrix> env = ReadTransitionMatrix(env_path);
  if (!env.ok()) return env.status();
  absl::StatusOr<TransitionMatrix> agent = ReadTransitionMatrix(agent_path);
  if (!agent.ok()) return agent.status();
  if (env->dim() != agent->dim()) {
    return absl::InvalidArgumentError("matrices differ in dimension");
  }
  Belief prior;
  if (prior_name == "uniform") {
    prior = UniformBelief(env->dim());
  } else if (prior_name == "stationary") {
    prior = StationaryBelief(*env);
  } else {
    return absl::InvalidArgumentError("prior must be uniform or stationary");
  }
  absl::StatusOr<RegretCurve> curve =
      BayesRegret(*env, *agent, MakeHardRewardModel(env->dim()), prior,
                  horizon, runs, seed, WorkerCountFromEnv());
  if (!curve.ok()) return curve.status();
  RegretSummary summary{curve->mean, curve->std_error};
  if (curve->belief_resets > 0) {
    std::cerr << "note: " << curve->belief_resets
              << " belief resets to uniform\n";
  }
  return WriteFile(out, CurveToCsv(summary));
}

absl::Status Sweep(const std::string& config_path, const std::string& out,
                   bool tradeoff) {
  absl::StatusOr<std::string> text = ReadFile(config_path);
  if (!text.ok()) return text.status();
  absl::StatusOr<ExperimentConfig> config = ParseExperimentConfigText(*text);
  if (!config.ok()) return config.status();
  if (!out.empty()) config->output = out;
  if (config->output.empty()) {
    return absl::InvalidArgumentError("set experiment.output or pass --out");
  }
  if (config->cohort_source == "manifest") {
    const fs::path p(config->manifest_path);
    if (p.is_relative()) {
      config->manifest_path =
          (fs::path(config_path).parent_path() / p).string();
    }
  }
  absl::StatusOr<Cohort> cohort = BuildCohort(*config);
  if (!cohort.ok()) return cohort.status();
  const int workers = WorkerCountFromEnv();
  absl::StatusOr<SweepResult> result =
      tradeoff ? RunTradeoff(*config, *cohort, workers)
               : RunAdsSweep(*config, *cohort, workers);
  if (!result.ok()) return result.status();
  return WriteSweepOutputs(*config, *result, tradeoff ? "tradeoff" : "ads");
}

}  // namespace
}  // namespace privbandit

int main(int argc, char** argv) {
  using namespace privbandit;
  CLI::App app{"privbandit: privacy/regret benchmarks for shared transition "
               "matrices"};
  app.require_subcommand(1);
  absl::Status status;

  int users = 30, states = 41, templates = 0, scalars = 1;
  uint64_t seed = 0;
  double concentration = 4.0, sharpness = 3.0;
  std::string out, events, kind = "activity";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("--users", users)->check(CLI::PositiveNumber);
  synth->add_option("--states", states)->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed);
  synth->add_option("--concentration", concentration);
  synth->add_option("--templates", templates);
  synth->add_option("--sharpness", sharpness);
  synth->add_option("--out", out, "Output directory")->required();
  synth->callback([&] {
    status = Synth(users, states, seed, concentration, templates, sharpness,
                   out);
  });

  auto* ingest = app.add_subcommand(
      "ingest", "Build transition matrices and profiles from an event log");
  ingest->add_option("--events", events, "user_id,timestamp_s,state CSV")
      ->required();
  ingest->add_option("--states", states)->required();
  ingest->add_option("--profile", kind,
                     "hourly, activity, adjacency or none");
  ingest->add_option("--scalars", scalars, "Activity-profile scalar slots");
  ingest->add_option("--out", out, "Output directory")->required();
  ingest->callback(
      [&] { status = Ingest(events, states, kind, scalars, out); });

  auto* profiles = app.add_subcommand("profiles", "Profiles from an event log");
  profiles->add_option("--events", events)->required();
  profiles->add_option("--states", states)->required();
  profiles->add_option("--kind", kind, "hourly, activity or adjacency");
  profiles->add_option("--scalars", scalars);
  profiles->add_option("--out", out, "Profile CSV")->required();
  profiles->callback(
      [&] { status = Profiles(events, states, kind, scalars, out); });

  std::string profile_path;
  int k = 7;
  auto* cluster = app.add_subcommand("cluster", "Embed and cluster profiles");
  cluster->add_option("--profiles", profile_path)->required();
  cluster->add_option("--k", k)->required();
  cluster->add_option("--seed", seed);
  cluster->add_option("--out", out, "Assignment CSV")->required();
  cluster->callback([&] { status = Cluster(profile_path, k, seed, out); });

  AnonymizeArgs an;
  auto* anonymize =
      app.add_subcommand("anonymize", "Apply one strategy to a cohort");
  anonymize->add_option("--manifest", an.manifest)->required();
  anonymize->add_option("--strategy", an.strategy);
  anonymize->add_option("--epsilon", an.epsilon);
  anonymize->add_option("--rank", an.rank);
  anonymize->add_option("--multiplier", an.multiplier);
  anonymize->add_option("--post-noise", an.post_noise);
  anonymize->add_option("--post-rank", an.post_rank);
  anonymize->add_option("--base-k", an.base_k);
  anonymize->add_option("--seed", an.seed);
  anonymize->add_option("--bins", an.bins);
  anonymize->add_option("--floor", an.floor);
  anonymize->add_option("--out", an.out, "Output directory")->required();
  anonymize->callback([&] { status = Anonymize(an); });

  std::string manifest, released;
  int cells = 91, trials = kDefaultAttackTrials;
  double alpha = kDefaultAlpha;
  auto* attack = app.add_subcommand("attack", "Run the linkage attack");
  attack->add_option("--manifest", manifest, "True cohort")->required();
  attack->add_option("--released", released, "Released cohort")->required();
  attack->add_option("--cells", cells);
  attack->add_option("--alpha", alpha);
  attack->add_option("--trials", trials);
  attack->add_option("--seed", seed);
  attack->add_option("--out", out, "Result CSV (stdout if omitted)");
  attack->callback([&] {
    status = Attack(manifest, released, cells, alpha, trials, seed, out);
  });

  std::string env_path, agent_path, prior = "uniform";
  int horizon = 1000, runs = 200;
  auto* simulate = app.add_subcommand("simulate", "Bayes regret of one pair");
  simulate->add_option("--env", env_path, "True matrix")->required();
  simulate->add_option("--agent", agent_path, "Agent matrix")->required();
  simulate->add_option("--horizon", horizon);
  simulate->add_option("--runs", runs);
  simulate->add_option("--seed", seed);
  simulate->add_option("--prior", prior);
  simulate->add_option("--out", out, "Curve CSV")->required();
  simulate->callback([&] {
    status = Simulate(env_path, agent_path, horizon, runs, seed, prior, out);
  });

  std::string config;
  auto* tradeoff =
      app.add_subcommand("sweep-tradeoff", "Privacy vs regret sweep");
  tradeoff->add_option("--config", config)->required();
  tradeoff->add_option("--out", out, "Overrides experiment.output");
  tradeoff->callback([&] { status = Sweep(config, out, true); });

  auto* ads = app.add_subcommand("sweep-ads", "Deanonymization and ADS sweep");
  ads->add_option("--config", config)->required();
  ads->add_option("--out", out, "Overrides experiment.output");
  ads->callback([&] { status = Sweep(config, out, false); });

  CLI11_PARSE(app, argc, argv);
  if (!status.ok()) {
    std::cerr << "error: " << status.message() << "\n";
    return 1;
  }
  return 0;
}
