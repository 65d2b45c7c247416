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

#include "privbandit/harness.h"

#include <cmath>
#include <filesystem>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "privbandit/adversary.h"
#include "privbandit/bandit.h"
#include "privbandit/io.h"
#include "privbandit/parallel.h"
#include "privbandit/privacy_metrics.h"
#include "privbandit/random.h"

namespace privbandit {
namespace {

using nlohmann::json;

std::vector<int> AuxGridTo(int hi, int step) {
  std::vector<int> grid;
  for (int c = 1; c <= hi; c += step) grid.push_back(c);
  return grid;
}

// Reads typed fields out of a JSON object and rejects keys nobody asked for.
class FieldReader {
 public:
  FieldReader(const json& object, std::string context)
      : object_(object), context_(std::move(context)) {}

  bool Has(const std::string& key) {
    seen_.insert(key);
    return object_.contains(key) && !object_[key].is_null();
  }

  absl::Status Int(const std::string& key, int& out) {
    if (!Has(key)) return absl::OkStatus();
    if (!object_[key].is_number_integer()) return TypeError(key, "an integer");
    out = object_[key].get<int>();
    return absl::OkStatus();
  }
  absl::Status Seed(const std::string& key, uint64_t& out) {
    if (!Has(key)) return absl::OkStatus();
    if (!object_[key].is_number_unsigned()) {
      return TypeError(key, "a non-negative integer");
    }
    out = object_[key].get<uint64_t>();
    return absl::OkStatus();
  }
  absl::Status Double(const std::string& key, double& out) {
    if (!Has(key)) return absl::OkStatus();
    if (!object_[key].is_number()) return TypeError(key, "a number");
    out = object_[key].get<double>();
    return absl::OkStatus();
  }
  absl::Status String(const std::string& key, std::string& out) {
    if (!Has(key)) return absl::OkStatus();
    if (!object_[key].is_string()) return TypeError(key, "a string");
    out = object_[key].get<std::string>();
    return absl::OkStatus();
  }
  absl::Status IntList(const std::string& key, std::vector<int>& out) {
    if (!Has(key)) return absl::OkStatus();
    if (!object_[key].is_array()) return TypeError(key, "an integer array");
    out.clear();
    for (const json& v : object_[key]) {
      if (!v.is_number_integer()) return TypeError(key, "an integer array");
      out.push_back(v.get<int>());
    }
    return absl::OkStatus();
  }
  absl::Status DoubleList(const std::string& key, std::vector<double>& out) {
    if (!Has(key)) return absl::OkStatus();
    if (!object_[key].is_array()) return TypeError(key, "a number array");
    out.clear();
    for (const json& v : object_[key]) {
      if (!v.is_number()) return TypeError(key, "a number array");
      out.push_back(v.get<double>());
    }
    return absl::OkStatus();
  }
  const json& Get(const std::string& key) {
    seen_.insert(key);
    return object_[key];
  }

  absl::Status CheckNoUnknownKeys() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.count(key)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("%s: unknown key '%s'", context_, key));
      }
    }
    return absl::OkStatus();
  }

 private:
  absl::Status TypeError(const std::string& key, std::string_view what) const {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s: '%s' must be %s", context_, key, std::string(what)));
  }

  const json& object_;
  std::string context_;
  std::set<std::string> seen_;
};

#define PB_RETURN_IF_ERROR(expr)            \
  do {                                      \
    if (absl::Status _s = (expr); !_s.ok()) \
      return _s;                            \
  } while (0)

absl::StatusOr<SweepAxis> ParseAxis(std::string_view name) {
  if (name == "noise") return SweepAxis::kNoise;
  if (name == "rank") return SweepAxis::kRank;
  if (name == "fixed") return SweepAxis::kFixed;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown sweep axis '%s'", std::string(name)));
}

std::string_view AxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNoise:
      return "noise";
    case SweepAxis::kRank:
      return "rank";
    case SweepAxis::kFixed:
      return "fixed";
  }
  return "fixed";
}

absl::StatusOr<SweepStrategy> ParseStrategy(const json& j, int index) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("strategies must be objects");
  }
  FieldReader r(j, absl::StrFormat("strategies[%d]", index));
  SweepStrategy s;
  std::string kind, axis = "noise";
  PB_RETURN_IF_ERROR(r.String("kind", kind));
  if (kind.empty()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("strategies[%d]: missing 'kind'", index));
  }
  absl::StatusOr<StrategyKind> parsed = ParseStrategyKind(kind);
  if (!parsed.ok()) return parsed.status();
  s.spec.kind = *parsed;
  PB_RETURN_IF_ERROR(r.String("axis", axis));
  absl::StatusOr<SweepAxis> parsed_axis = ParseAxis(axis);
  if (!parsed_axis.ok()) return parsed_axis.status();
  s.axis = *parsed_axis;
  PB_RETURN_IF_ERROR(r.String("label", s.label));
  PB_RETURN_IF_ERROR(r.Double("epsilon", s.spec.epsilon));
  PB_RETURN_IF_ERROR(r.Int("rank", s.spec.rank));
  PB_RETURN_IF_ERROR(r.Int("multiplier", s.spec.multiplier));
  if (r.Has("post_noise")) {
    double v = 0.0;
    PB_RETURN_IF_ERROR(r.Double("post_noise", v));
    s.spec.post_noise = v;
  }
  if (r.Has("post_rank")) {
    int v = 0;
    PB_RETURN_IF_ERROR(r.Int("post_rank", v));
    s.spec.post_rank = v;
  }
  PB_RETURN_IF_ERROR(r.CheckNoUnknownKeys());
  if (s.spec.epsilon < 0.0 || (s.spec.post_noise && *s.spec.post_noise < 0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("strategies[%d]: negative noise", index));
  }
  if (s.spec.multiplier < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("strategies[%d]: multiplier must be >= 1", index));
  }
  if (s.spec.kind == StrategyKind::kTsvd && s.axis != SweepAxis::kRank &&
      s.spec.rank < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "strategies[%d]: tsvd needs 'rank' unless swept over ranks", index));
  }
  return s;
}

json StrategyToJson(const SweepStrategy& s) {
  json j = {{"kind", std::string(StrategyName(s.spec.kind))},
            {"axis", std::string(AxisName(s.axis))}};
  if (!s.label.empty()) j["label"] = s.label;
  if (s.spec.kind == StrategyKind::kLaplace) j["epsilon"] = s.spec.epsilon;
  if (s.spec.kind == StrategyKind::kTsvd) j["rank"] = s.spec.rank;
  if (s.spec.kind == StrategyKind::kClusterAverage) {
    j["multiplier"] = s.spec.multiplier;
  }
  if (s.spec.post_noise) j["post_noise"] = *s.spec.post_noise;
  if (s.spec.post_rank) j["post_rank"] = *s.spec.post_rank;
  return j;
}

bool NeedsProfiles(const ExperimentConfig& config) {
  for (const SweepStrategy& s : config.strategies) {
    switch (s.spec.kind) {
      case StrategyKind::kClusterAverage:
      case StrategyKind::kNearestNeighbor:
      case StrategyKind::kSecondNearestNeighbor:
        return true;
      default:
        break;
    }
  }
  return false;
}

double EffectiveEpsilon(const StrategySpec& spec) {
  if (spec.kind == StrategyKind::kLaplace) return spec.epsilon;
  return spec.post_noise.value_or(0.0);
}

int EffectiveRank(const StrategySpec& spec) {
  if (spec.kind == StrategyKind::kTsvd) return spec.rank;
  return spec.post_rank.value_or(0);
}

struct Job {
  int strategy = 0;
  GridPoint point;
};

absl::StatusOr<std::vector<Job>> ExpandJobs(const ExperimentConfig& config,
                                            int d) {
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < config.strategies.size(); ++s) {
    absl::StatusOr<std::vector<GridPoint>> points =
        ExpandStrategy(config.strategies[s], config, d);
    if (!points.ok()) return points.status();
    for (GridPoint& p : *points) {
      jobs.push_back({static_cast<int>(s), std::move(p)});
    }
  }
  return jobs;
}

absl::StatusOr<WeightVector> CohortWeights(const ExperimentConfig& config,
                                           const Cohort& cohort) {
  const std::vector<Record> records = ToRecords(cohort.matrices);
  return EntropyWeights(records, config.entropy_bins, config.entropy_floor);
}

absl::Status CheckCohort(const ExperimentConfig& config, const Cohort& cohort) {
  if (cohort.matrices.size() < 2) {
    return absl::InvalidArgumentError("sweeps need at least two users");
  }
  const int d = cohort.matrices.front().dim();
  auto check_cells = [d](int cells) -> absl::Status {
    if (cells < 1 || cells > d * d) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "aux cells %d outside [1, %d] for d = %d", cells, d * d, d));
    }
    return absl::OkStatus();
  };
  PB_RETURN_IF_ERROR(check_cells(config.aux_cells));
  for (int c : config.aux_grid) PB_RETURN_IF_ERROR(check_cells(c));
  return absl::OkStatus();
}

ResultRow BaseRow(const ExperimentConfig& config, const Job& job) {
  ResultRow row;
  const std::string& label = config.strategies[job.strategy].label;
  row.strategy =
      label.empty() ? std::string(StrategyName(job.point.spec.kind)) : label;
  row.param = DescribeStrategy(job.point.spec);
  row.epsilon = job.point.epsilon;
  row.rank = job.point.rank;
  row.seed = config.base_seed;
  return row;
}

std::string OptionalField(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

}  // namespace

absl::StatusOr<DatasetPreset> FindDatasetPreset(std::string_view name) {
  if (name == "casas") {
    return DatasetPreset{"casas", 41, 30, 7, 91, 3.0, AuxGridTo(100, 10)};
  }
  if (name == "endomondo") {
    return DatasetPreset{"endomondo", 39, 50, 8, 91, 3.0, AuxGridTo(100, 10)};
  }
  if (name == "fitbit") {
    return DatasetPreset{"fitbit", 4, 33, 8, 14, 3e-4, AuxGridTo(15, 1)};
  }
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown preset '%s'", std::string(name)));
}

absl::StatusOr<ScalePreset> FindScalePreset(std::string_view name) {
  if (name == "desk") return ScalePreset{"desk", 1000, 200};
  if (name == "full") return ScalePreset{"full", 2500, 500};
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown scale '%s'", std::string(name)));
}

std::vector<double> NoiseGrid(double lo, double hi, int points) {
  std::vector<double> grid;
  grid.reserve(std::max(points, 0));
  for (int i = 0; i < points; ++i) {
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / points);
  }
  return grid;
}

std::vector<int> RankGrid(int d) {
  std::vector<int> grid;
  for (int k = d; k >= 1; --k) grid.push_back(k);
  return grid;
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const json& root) {
  if (!root.is_object() || !root.contains("experiment") ||
      !root["experiment"].is_object()) {
    return absl::InvalidArgumentError(
        "config must be an object with an \"experiment\" object");
  }
  for (const auto& [key, value] : root.items()) {
    if (key != "experiment") {
      return absl::InvalidArgumentError(
          absl::StrFormat("unknown top-level key '%s'", key));
    }
  }
  FieldReader r(root["experiment"], "experiment");
  ExperimentConfig c;
  c.preset = "casas";
  c.scale = "desk";
  PB_RETURN_IF_ERROR(r.String("preset", c.preset));
  PB_RETURN_IF_ERROR(r.String("scale", c.scale));
  absl::StatusOr<DatasetPreset> preset = FindDatasetPreset(c.preset);
  if (!preset.ok()) return preset.status();
  absl::StatusOr<ScalePreset> scale = FindScalePreset(c.scale);
  if (!scale.ok()) return scale.status();

  c.synth.users = preset->users;
  c.synth.states = preset->states;
  c.cluster_base_k = preset->cluster_base_k;
  c.aux_cells = preset->aux_cells;
  c.aux_grid = preset->aux_grid;
  c.horizon = scale->horizon;
  c.runs = scale->runs;
  c.epsilon_grid = NoiseGrid(0.0, preset->epsilon_hi, 50);

  PB_RETURN_IF_ERROR(r.Seed("base_seed", c.base_seed));
  c.synth.seed = c.base_seed;
  if (r.Has("cohort")) {
    const json& cj = r.Get("cohort");
    if (!cj.is_object()) {
      return absl::InvalidArgumentError("experiment.cohort must be an object");
    }
    FieldReader cr(cj, "experiment.cohort");
    PB_RETURN_IF_ERROR(cr.String("source", c.cohort_source));
    PB_RETURN_IF_ERROR(cr.Int("users", c.synth.users));
    PB_RETURN_IF_ERROR(cr.Int("states", c.synth.states));
    PB_RETURN_IF_ERROR(cr.Double("concentration", c.synth.concentration));
    PB_RETURN_IF_ERROR(cr.Int("templates", c.synth.templates));
    PB_RETURN_IF_ERROR(cr.Double("sharpness", c.synth.sharpness));
    PB_RETURN_IF_ERROR(cr.Int("profile_dims", c.synth.profile_dims));
    PB_RETURN_IF_ERROR(cr.Double("profile_spread", c.synth.profile_spread));
    PB_RETURN_IF_ERROR(cr.Seed("seed", c.synth.seed));
    PB_RETURN_IF_ERROR(cr.String("path", c.manifest_path));
    PB_RETURN_IF_ERROR(cr.CheckNoUnknownKeys());
  }
  if (c.cohort_source != "synthetic" && c.cohort_source != "manifest") {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cohort source must be 'synthetic' or 'manifest', got '%s'",
        c.cohort_source));
  }
  if (c.cohort_source == "manifest" && c.manifest_path.empty()) {
    return absl::InvalidArgumentError("manifest cohort needs a 'path'");
  }

  if (r.Has("strategies")) {
    const json& sj = r.Get("strategies");
    if (!sj.is_array()) {
      return absl::InvalidArgumentError("experiment.strategies must be a list");
    }
    int index = 0;
    for (const json& entry : sj) {
      absl::StatusOr<SweepStrategy> s = ParseStrategy(entry, index++);
      if (!s.ok()) return s.status();
      c.strategies.push_back(*std::move(s));
    }
  } else {
    SweepStrategy laplace;
    laplace.spec.kind = StrategyKind::kLaplace;
    c.strategies.push_back(laplace);
  }

  if (r.Has("noise_grid")) {
    const json& gj = r.Get("noise_grid");
    if (!gj.is_object()) {
      return absl::InvalidArgumentError("noise_grid must be an object");
    }
    FieldReader gr(gj, "experiment.noise_grid");
    double lo = 0.0, hi = preset->epsilon_hi;
    int points = 50;
    PB_RETURN_IF_ERROR(gr.Double("lo", lo));
    PB_RETURN_IF_ERROR(gr.Double("hi", hi));
    PB_RETURN_IF_ERROR(gr.Int("points", points));
    PB_RETURN_IF_ERROR(gr.CheckNoUnknownKeys());
    if (points < 1 || !(hi >= lo) || lo < 0.0) {
      return absl::InvalidArgumentError(
          "noise_grid needs 0 <= lo <= hi and points >= 1");
    }
    c.epsilon_grid = NoiseGrid(lo, hi, points);
  }
  PB_RETURN_IF_ERROR(r.DoubleList("epsilons", c.epsilon_grid));
  PB_RETURN_IF_ERROR(r.IntList("ranks", c.rank_grid));
  PB_RETURN_IF_ERROR(r.Int("aux_cells", c.aux_cells));
  PB_RETURN_IF_ERROR(r.IntList("aux_grid", c.aux_grid));
  PB_RETURN_IF_ERROR(r.Int("horizon", c.horizon));
  PB_RETURN_IF_ERROR(r.Int("runs", c.runs));
  PB_RETURN_IF_ERROR(r.Int("attack_trials", c.attack_trials));
  PB_RETURN_IF_ERROR(r.Double("alpha", c.alpha));
  PB_RETURN_IF_ERROR(r.Int("cluster_base_k", c.cluster_base_k));
  PB_RETURN_IF_ERROR(r.String("output", c.output));
  if (r.Has("entropy")) {
    const json& ej = r.Get("entropy");
    if (!ej.is_object()) {
      return absl::InvalidArgumentError("entropy must be an object");
    }
    FieldReader er(ej, "experiment.entropy");
    PB_RETURN_IF_ERROR(er.Int("bins", c.entropy_bins));
    PB_RETURN_IF_ERROR(er.Double("floor", c.entropy_floor));
    PB_RETURN_IF_ERROR(er.CheckNoUnknownKeys());
  }
  std::string prior = "uniform";
  PB_RETURN_IF_ERROR(r.String("prior", prior));
  if (prior == "uniform") {
    c.prior = PriorKind::kUniform;
  } else if (prior == "stationary") {
    c.prior = PriorKind::kStationary;
  } else {
    return absl::InvalidArgumentError(
        absl::StrFormat("prior must be uniform or stationary, got '%s'",
                        prior));
  }
  PB_RETURN_IF_ERROR(r.CheckNoUnknownKeys());

  if (c.epsilon_grid.empty() || c.aux_grid.empty() || c.strategies.empty()) {
    return absl::InvalidArgumentError("grids and strategies must be non-empty");
  }
  for (double e : c.epsilon_grid) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      return absl::InvalidArgumentError("epsilons must be finite and >= 0");
    }
  }
  if (c.horizon < 1 || c.runs < 1 || c.attack_trials < 1) {
    return absl::InvalidArgumentError(
        "horizon, runs and attack_trials must be >= 1");
  }
  if (!(c.alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (c.entropy_bins < 2 || !(c.entropy_floor > 0.0)) {
    return absl::InvalidArgumentError(
        "entropy needs bins >= 2 and a positive floor");
  }
  if (c.cluster_base_k < 1) {
    return absl::InvalidArgumentError("cluster_base_k must be >= 1");
  }
  return c;
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfigText(
    std::string_view text) {
  json root = json::parse(text.begin(), text.end(), nullptr,
                          /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    return absl::InvalidArgumentError("config is not valid JSON");
  }
  return ParseExperimentConfig(root);
}

json ExperimentConfigToJson(const ExperimentConfig& c) {
  json cohort = {{"source", c.cohort_source}};
  if (c.cohort_source == "synthetic") {
    cohort["users"] = c.synth.users;
    cohort["states"] = c.synth.states;
    cohort["concentration"] = c.synth.concentration;
    cohort["templates"] = c.synth.templates;
    cohort["sharpness"] = c.synth.sharpness;
    cohort["profile_dims"] = c.synth.profile_dims;
    cohort["profile_spread"] = c.synth.profile_spread;
    cohort["seed"] = c.synth.seed;
  } else {
    cohort["path"] = c.manifest_path;
  }
  json strategies = json::array();
  for (const SweepStrategy& s : c.strategies) {
    strategies.push_back(StrategyToJson(s));
  }
  json e = {
      {"preset", c.preset},
      {"scale", c.scale},
      {"cohort", cohort},
      {"strategies", strategies},
      {"epsilons", c.epsilon_grid},
      {"ranks", c.rank_grid},
      {"aux_cells", c.aux_cells},
      {"aux_grid", c.aux_grid},
      {"horizon", c.horizon},
      {"runs", c.runs},
      {"attack_trials", c.attack_trials},
      {"alpha", c.alpha},
      {"base_seed", c.base_seed},
      {"entropy", {{"bins", c.entropy_bins}, {"floor", c.entropy_floor}}},
      {"prior", c.prior == PriorKind::kUniform ? "uniform" : "stationary"},
      {"cluster_base_k", c.cluster_base_k},
      {"output", c.output},
  };
  return json{{"experiment", e}};
}

absl::StatusOr<Cohort> BuildCohort(const ExperimentConfig& config) {
  Cohort cohort;
  cohort.cluster_base_k = config.cluster_base_k;
  cohort.clustering_seed = DeriveSeed(config.base_seed, "clustering");
  if (config.cohort_source == "synthetic") {
    absl::StatusOr<SyntheticCohort> synth = SynthCohort(config.synth);
    if (!synth.ok()) return synth.status();
    cohort.matrices = std::move(synth->matrices);
    cohort.profiles = std::move(synth->profiles);
    return cohort;
  }
  absl::StatusOr<LoadedCohort> loaded = LoadCohort(config.manifest_path);
  if (!loaded.ok()) return loaded.status();
  cohort.matrices = std::move(loaded->matrices);
  cohort.profiles = std::move(loaded->profiles);
  if (cohort.profiles.empty() && NeedsProfiles(config)) {
    return absl::InvalidArgumentError(
        "profile-based strategies need a manifest with a profile file");
  }
  return cohort;
}

absl::StatusOr<std::vector<GridPoint>> ExpandStrategy(
    const SweepStrategy& strategy, const ExperimentConfig& config, int d) {
  std::vector<GridPoint> points;
  auto add = [&points](StrategySpec spec) {
    points.push_back({spec, EffectiveEpsilon(spec), EffectiveRank(spec)});
  };
  switch (strategy.axis) {
    case SweepAxis::kFixed:
      add(strategy.spec);
      break;
    case SweepAxis::kNoise:
      for (double e : config.epsilon_grid) {
        StrategySpec spec = strategy.spec;
        if (spec.kind == StrategyKind::kLaplace) {
          spec.epsilon = e;
        } else {
          spec.post_noise = e;
        }
        add(spec);
      }
      break;
    case SweepAxis::kRank: {
      const std::vector<int> ranks =
          config.rank_grid.empty() ? RankGrid(d) : config.rank_grid;
      for (int k : ranks) {
        if (k < 1 || k > d) {
          return absl::InvalidArgumentError(
              absl::StrFormat("rank %d outside [1, %d]", k, d));
        }
        StrategySpec spec = strategy.spec;
        if (spec.kind == StrategyKind::kTsvd) {
          spec.rank = k;
        } else {
          spec.post_rank = k;
        }
        add(spec);
      }
      break;
    }
  }
  return points;
}

absl::StatusOr<RegretSummary> CohortRegret(
    std::span<const TransitionMatrix> truth,
    std::span<const TransitionMatrix> served, PriorKind prior, int horizon,
    int runs, uint64_t seed, int workers) {
  if (truth.size() != served.size() || truth.empty()) {
    return absl::InvalidArgumentError("truth and served sets must align");
  }
  const int n = static_cast<int>(truth.size());
  RegretSummary out;
  out.mean.assign(horizon, 0.0);
  out.std_error.assign(horizon, 0.0);
  for (int u = 0; u < n; ++u) {
    const int d = truth[u].dim();
    const Belief p = prior == PriorKind::kUniform ? UniformBelief(d)
                                                  : StationaryBelief(truth[u]);
    absl::StatusOr<RegretCurve> curve = BayesRegret(
        truth[u], served[u], MakeHardRewardModel(d), p, horizon, runs,
        DeriveSeed(seed, "environment", static_cast<uint64_t>(u)), workers);
    if (!curve.ok()) return curve.status();
    for (int t = 0; t < horizon; ++t) {
      out.mean[t] += curve->mean[t];
      out.std_error[t] += curve->std_error[t] * curve->std_error[t];
    }
  }
  for (int t = 0; t < horizon; ++t) {
    out.mean[t] /= n;
    out.std_error[t] = std::sqrt(out.std_error[t]) / n;
  }
  return out;
}

absl::StatusOr<SweepResult> RunTradeoff(const ExperimentConfig& config,
                                        const Cohort& cohort, int workers) {
  PB_RETURN_IF_ERROR(CheckCohort(config, cohort));
  const int d = cohort.matrices.front().dim();
  absl::StatusOr<std::vector<Job>> jobs = ExpandJobs(config, d);
  if (!jobs.ok()) return jobs.status();
  absl::StatusOr<WeightVector> weights = CohortWeights(config, cohort);
  if (!weights.ok()) return weights.status();
  const std::vector<Record> truth = ToRecords(cohort.matrices);

  const std::size_t n_jobs = jobs->size();
  std::vector<absl::Status> status(n_jobs);
  SweepResult result;
  result.rows.resize(n_jobs);
  result.curves.resize(n_jobs);
  const int inner = n_jobs == 1 ? workers : 1;
  ParallelFor(n_jobs, workers, [&](std::size_t j) {
    const Job& job = (*jobs)[j];
    Rng noise_rng(DeriveSeed(config.base_seed, "noise", j));
    absl::StatusOr<AnonymizedSet> released =
        ApplyStrategy(cohort, job.point.spec, *weights, noise_rng);
    if (!released.ok()) {
      status[j] = released.status();
      return;
    }
    Rng attack_rng(DeriveSeed(config.base_seed, "attack", j));
    absl::StatusOr<DeanonEstimate> deanon =
        DeanonProbability(cohort.matrices, *released, config.aux_cells,
                          config.alpha, config.attack_trials, attack_rng);
    if (!deanon.ok()) {
      status[j] = deanon.status();
      return;
    }
    const std::vector<Record> served = ToRecords(released->served);
    absl::StatusOr<double> ads = AdsIdentifiability(truth, served, *weights);
    if (!ads.ok()) {
      status[j] = ads.status();
      return;
    }
    absl::StatusOr<RegretSummary> regret =
        CohortRegret(cohort.matrices, released->served, config.prior,
                     config.horizon, config.runs, config.base_seed, inner);
    if (!regret.ok()) {
      status[j] = regret.status();
      return;
    }
    ResultRow row = BaseRow(config, job);
    row.n_cells = config.aux_cells;
    row.deanon_prob = deanon->probability;
    row.deanon_chance = deanon->chance;
    row.ads = *ads;
    row.regret_mean = regret->mean.back();
    row.regret_stderr = regret->std_error.back();
    row.runs = config.runs;
    result.rows[j] = std::move(row);
    result.curves[j] = *std::move(regret);
  });
  for (const absl::Status& s : status) {
    if (!s.ok()) return s;
  }
  return result;
}

absl::StatusOr<SweepResult> RunAdsSweep(const ExperimentConfig& config,
                                        const Cohort& cohort, int workers) {
  PB_RETURN_IF_ERROR(CheckCohort(config, cohort));
  const int d = cohort.matrices.front().dim();
  absl::StatusOr<std::vector<Job>> jobs = ExpandJobs(config, d);
  if (!jobs.ok()) return jobs.status();
  absl::StatusOr<WeightVector> weights = CohortWeights(config, cohort);
  if (!weights.ok()) return weights.status();
  const std::vector<Record> truth = ToRecords(cohort.matrices);

  const std::size_t n_jobs = jobs->size();
  const std::size_t n_cells = config.aux_grid.size();
  std::vector<absl::Status> status(n_jobs);
  SweepResult result;
  result.rows.resize(n_jobs * n_cells);
  ParallelFor(n_jobs, workers, [&](std::size_t j) {
    const Job& job = (*jobs)[j];
    Rng noise_rng(DeriveSeed(config.base_seed, "noise", j));
    absl::StatusOr<AnonymizedSet> released =
        ApplyStrategy(cohort, job.point.spec, *weights, noise_rng);
    if (!released.ok()) {
      status[j] = released.status();
      return;
    }
    const std::vector<Record> served = ToRecords(released->served);
    absl::StatusOr<double> ads = AdsIdentifiability(truth, served, *weights);
    if (!ads.ok()) {
      status[j] = ads.status();
      return;
    }
    const uint64_t attack_seed = DeriveSeed(config.base_seed, "attack", j);
    for (std::size_t c = 0; c < n_cells; ++c) {
      const int cells = config.aux_grid[c];
      Rng attack_rng(
          DeriveSeed(attack_seed, "cells", static_cast<uint64_t>(cells)));
      absl::StatusOr<DeanonEstimate> deanon =
          DeanonProbability(cohort.matrices, *released, cells, config.alpha,
                            config.attack_trials, attack_rng);
      if (!deanon.ok()) {
        status[j] = deanon.status();
        return;
      }
      ResultRow row = BaseRow(config, job);
      row.n_cells = cells;
      row.deanon_prob = deanon->probability;
      row.deanon_chance = deanon->chance;
      row.ads = *ads;
      result.rows[j * n_cells + c] = std::move(row);
    }
  });
  for (const absl::Status& s : status) {
    if (!s.ok()) return s;
  }
  return result;
}

std::string ResultsToCsv(std::span<const ResultRow> rows) {
  std::string out = std::string(kResultHeader) + "\n";
  for (const ResultRow& r : rows) {
    absl::StrAppend(&out, CsvField(r.strategy), ",", CsvField(r.param), ",",
                    FormatDouble(r.epsilon), ",", r.rank, ",", r.n_cells, ",",
                    FormatDouble(r.deanon_prob), ",",
                    FormatDouble(r.deanon_chance), ",", OptionalField(r.ads),
                    ",", OptionalField(r.regret_mean), ",",
                    OptionalField(r.regret_stderr), ",", r.runs, ",", r.seed,
                    "\n");
  }
  return out;
}

std::string CurveToCsv(const RegretSummary& curve) {
  std::string out = std::string(kCurveHeader) + "\n";
  for (std::size_t t = 0; t < curve.mean.size(); ++t) {
    absl::StrAppend(&out, t + 1, ",", FormatDouble(curve.mean[t]), ",",
                    FormatDouble(curve.std_error[t]), "\n");
  }
  return out;
}

absl::Status WriteSweepOutputs(const ExperimentConfig& config,
                               const SweepResult& result,
                               std::string_view kind) {
  if (config.output.empty()) {
    return absl::InvalidArgumentError("no output path configured");
  }
  const std::filesystem::path out(config.output);
  PB_RETURN_IF_ERROR(WriteFile(out, ResultsToCsv(result.rows)));
  json meta = ExperimentConfigToJson(config);
  meta["toolkit_version"] = std::string(kToolkitVersion);
  meta["sweep"] = std::string(kind);
  meta["rows"] = result.rows.size();
  if (!result.curves.empty()) {
    meta["curves"] = out.string() + "_curves";
  }
  PB_RETURN_IF_ERROR(
      WriteFile(out.string() + ".meta.json", meta.dump(2) + "\n"));
  for (std::size_t i = 0; i < result.curves.size(); ++i) {
    const std::filesystem::path curve =
        std::filesystem::path(out.string() + "_curves") /
        absl::StrFormat("row_%04d.csv", i);
    PB_RETURN_IF_ERROR(WriteFile(curve, CurveToCsv(result.curves[i])));
  }
  return absl::OkStatus();
}

}  // namespace privbandit
