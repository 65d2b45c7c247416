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

#include "privbandit/adversary.h"

#include <cmath>
#include <map>
#include <numeric>

#include "absl/strings/str_format.h"

namespace privbandit {
namespace {

int CountMatches(const AuxiliaryInfo& aux, const Matrix& candidate,
                 double alpha) {
  const int d = static_cast<int>(candidate.cols());
  int hits = 0;
  for (std::size_t i = 0; i < aux.cells.size(); ++i) {
    hits += Sim(aux.values[i], candidate(aux.cells[i] / d, aux.cells[i] % d),
                alpha);
  }
  return hits;
}

struct Candidate {
  int group;
  int user;  // first user served this record
};

}  // namespace

absl::StatusOr<AuxiliaryInfo> SampleAux(const TransitionMatrix& record,
                                        int n_cells, Rng& rng) {
  const int d = record.dim();
  const int total = d * d;
  if (n_cells < 1 || n_cells > total) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n_cells %d outside [1, %d]", n_cells, total));
  }
  std::vector<int> pool(total);
  std::iota(pool.begin(), pool.end(), 0);
  AuxiliaryInfo aux;
  aux.cells.reserve(n_cells);
  aux.values.reserve(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    const int j = i + static_cast<int>(rng.UniformIndex(total - i));
    std::swap(pool[i], pool[j]);
    aux.cells.push_back(pool[i]);
    aux.values.push_back(record(pool[i] / d, pool[i] % d));
  }
  return aux;
}

absl::StatusOr<double> Score(const AuxiliaryInfo& aux, const Matrix& candidate,
                             double alpha) {
  if (aux.cells.empty()) return absl::InvalidArgumentError("empty support");
  for (int c : aux.cells) {
    if (c < 0 || c >= candidate.size()) {
      return absl::OutOfRangeError(absl::StrFormat("cell %d out of range", c));
    }
  }
  return static_cast<double>(CountMatches(aux, candidate, alpha)) /
         static_cast<double>(aux.cells.size());
}

absl::StatusOr<MatchOutcome> ScoreboardMatch(
    const AuxiliaryInfo& aux, std::span<const TransitionMatrix> candidates,
    double alpha, Rng& rng) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("no released records to match");
  }
  if (aux.cells.empty()) return absl::InvalidArgumentError("empty support");
  // Integer hit counts keep ties exact.
  std::vector<int> best;
  int best_hits = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const int hits = CountMatches(aux, candidates[i].matrix(), alpha);
    if (hits > best_hits) {
      best_hits = hits;
      best.clear();
    }
    if (hits == best_hits) best.push_back(static_cast<int>(i));
  }
  MatchOutcome out;
  out.match_set_size = static_cast<int>(best.size());
  out.matched = best[rng.UniformIndex(best.size())];
  return out;
}

double ChanceBaseline(int users) {
  return users > 0 ? 1.0 / static_cast<double>(users) : 0.0;
}

absl::StatusOr<DeanonEstimate> DeanonProbability(
    std::span<const TransitionMatrix> truth, const AnonymizedSet& released,
    int n_cells, double alpha, int trials, Rng& rng) {
  const int n = static_cast<int>(truth.size());
  if (n == 0) return absl::InvalidArgumentError("empty cohort");
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (!(alpha > 0.0)) return absl::InvalidArgumentError("alpha must be > 0");
  if (static_cast<int>(released.served.size()) != n ||
      static_cast<int>(released.group_of_user.size()) != n) {
    return absl::InvalidArgumentError(
        "released set is not aligned with the cohort");
  }
  for (int u = 0; u < n; ++u) {
    const int g = released.group_of_user[u];
    if (g < 0 || g >= static_cast<int>(released.group_sizes.size())) {
      return absl::OutOfRangeError(
          absl::StrFormat("user %d has invalid group %d", u, g));
    }
    if (released.served[u].dim() != truth[u].dim()) {
      return absl::InvalidArgumentError("released and true dimensions differ");
    }
  }

  std::vector<TransitionMatrix> entries;
  std::vector<Candidate> meta;
  for (int u = 0; u < n; ++u) {
    const int g = released.group_of_user[u];
    bool duplicate = false;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (meta[e].group == g && entries[e] == released.served[u]) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    entries.push_back(released.served[u]);
    meta.push_back({g, u});
  }

  const uint64_t base = rng.NextU64();
  // Successful trials keyed by the victim's group size.
  std::map<int, long long> hits_by_size;
  long long match_set_total = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial_rng(DeriveSeed(base, "attack", static_cast<uint64_t>(t)));
    const int victim = static_cast<int>(trial_rng.UniformIndex(n));
    absl::StatusOr<AuxiliaryInfo> aux =
        SampleAux(truth[victim], n_cells, trial_rng);
    if (!aux.ok()) return aux.status();
    absl::StatusOr<MatchOutcome> match =
        ScoreboardMatch(*aux, entries, alpha, trial_rng);
    if (!match.ok()) return match.status();
    match_set_total += match->match_set_size;
    const int group = released.group_of_user[victim];
    if (meta[match->matched].group == group) {
      ++hits_by_size[released.group_sizes[group]];
    }
  }

  DeanonEstimate out;
  out.trials = trials;
  for (const auto& [size, hits] : hits_by_size) {
    out.probability += static_cast<double>(hits) /
                       (static_cast<double>(size) * trials);
  }
  out.chance = ChanceBaseline(n);
  out.mean_match_set = static_cast<double>(match_set_total) / trials;
  return out;
}

}  // namespace privbandit
