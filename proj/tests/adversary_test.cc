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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "privbandit/stats.h"
#include "test_util.h"

namespace privbandit {
namespace {

using testing_util::RandomCohort;
using testing_util::RandomStochastic;

AnonymizedSet Unanonymized(const std::vector<TransitionMatrix>& cohort) {
  AnonymizedSet set;
  set.served = cohort;
  for (std::size_t u = 0; u < cohort.size(); ++u) {
    set.group_of_user.push_back(static_cast<int>(u));
    set.group_sizes.push_back(1);
  }
  return set;
}

TEST(SampleAux, CoversAndDistinct) {
  Rng gen(1);
  const TransitionMatrix m = RandomStochastic(4, gen);
  Rng rng(2);
  auto full = SampleAux(m, 16, rng);
  ASSERT_TRUE(full.ok());
  EXPECT_EQ(std::set<int>(full->cells.begin(), full->cells.end()).size(), 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(full->values[i], m(full->cells[i] / 4, full->cells[i] % 4));
  }
  auto one = SampleAux(m, 1, rng);
  ASSERT_TRUE(one.ok());
  EXPECT_EQ(one->cells.size(), 1u);
  EXPECT_FALSE(SampleAux(m, 0, rng).ok());
  EXPECT_FALSE(SampleAux(m, 17, rng).ok());
}

TEST(SampleAux, UniformOverCells) {
  const TransitionMatrix m = TransitionMatrix::Uniform(3);
  Rng rng(3);
  std::vector<int> counts(9, 0);
  const int n = 90000;
  for (int i = 0; i < n; ++i) ++counts[SampleAux(m, 1, rng)->cells[0]];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 1.0 / 9, 0.006);
}

TEST(Sim, Boundary) {
  EXPECT_EQ(Sim(0.5, 0.5005, 0.001), 1);
  EXPECT_EQ(Sim(0.3, 0.3, 0.001), 1);
  EXPECT_EQ(Sim(0.0, 0.5, 0.5), 0);
  EXPECT_EQ(Sim(0.5, 0.0, 0.5), 0);
}

TEST(Score, Examples) {
  Matrix victim(2, 2);
  victim << 0.1, 0.9, 0.4, 0.6;
  AuxiliaryInfo aux{{0, 1, 2, 3}, {0.1, 0.9, 0.4, 0.6}};
  EXPECT_EQ(*Score(aux, victim, 0.001), 1.0);
  Matrix off = victim.array() + 0.01;
  EXPECT_EQ(*Score(aux, off, 0.001), 0.0);
  Matrix three = victim;
  three(1, 1) = 0.0;
  EXPECT_EQ(*Score(aux, three, 0.001), 0.75);
  EXPECT_FALSE(Score(AuxiliaryInfo{}, victim, 0.001).ok());
  EXPECT_FALSE(Score(AuxiliaryInfo{{4}, {0.0}}, victim, 0.001).ok());
}

TEST(ScoreboardMatch, UniqueAndSymmetric) {
  Rng gen(4);
  const auto cohort = RandomCohort(5, 4, gen);
  Rng rng(5);
  auto aux = SampleAux(cohort[3], 8, rng);
  auto m = ScoreboardMatch(*aux, cohort, 0.001, rng);
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->matched, 3);
  EXPECT_EQ(m->match_set_size, 1);

  const std::vector<TransitionMatrix> same(6, cohort[0]);
  std::vector<int> picks(6, 0);
  for (int t = 0; t < 6000; ++t) {
    auto r = ScoreboardMatch(*aux, same, 0.001, rng);
    EXPECT_EQ(r->match_set_size, 6);
    ++picks[r->matched];
  }
  for (int p : picks) EXPECT_NEAR(p / 6000.0, 1.0 / 6, 0.03);
}

TEST(ScoreboardMatch, ArgmaxSetMatchesExhaustiveScores) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    // Coarse values make ties common.
    std::vector<TransitionMatrix> released;
    for (int i = 0; i < 10; ++i) {
      Matrix m(3, 3);
      for (int c = 0; c < 9; ++c) m(c / 3, c % 3) = rng.UniformIndex(3) + 1.0;
      released.push_back(TransitionMatrix::FromNonNegative(m));
    }
    auto aux = SampleAux(released[rng.UniformIndex(10)], 4, rng);
    const double alpha = 0.05;
    std::vector<double> scores;
    for (const auto& r : released) {
      scores.push_back(*Score(*aux, r.matrix(), alpha));
    }
    const double best = *std::max_element(scores.begin(), scores.end());
    const int set_size =
        static_cast<int>(std::count(scores.begin(), scores.end(), best));
    auto m = ScoreboardMatch(*aux, released, alpha, rng);
    ASSERT_TRUE(m.ok());
    EXPECT_EQ(m->match_set_size, set_size);
    EXPECT_EQ(scores[m->matched], best);
  }
}

TEST(DeanonProbability, PerfectWithoutAnonymization) {
  Rng gen(7);
  const auto cohort = RandomCohort(20, 8, gen);
  Rng rng(8);
  auto est = DeanonProbability(cohort, Unanonymized(cohort), 50, 0.001, 100,
                               rng);
  ASSERT_TRUE(est.ok());
  EXPECT_EQ(est->probability, 1.0);
  EXPECT_EQ(est->mean_match_set, 1.0);
  EXPECT_EQ(est->chance, 1.0 / 20);
}

TEST(DeanonProbability, GlobalAverageCreditsOneOverN) {
  Rng gen(9);
  const auto cohort = RandomCohort(20, 8, gen);
  AnonymizedSet set;
  set.served.assign(20, TransitionMatrix::Uniform(8));
  set.group_of_user.assign(20, 0);
  set.group_sizes = {20};
  Rng rng(10);
  auto est = DeanonProbability(cohort, set, 50, 0.001, 100, rng);
  ASSERT_TRUE(est.ok());
  EXPECT_EQ(est->probability, 1.0 / 20);
}

TEST(DeanonProbability, ClusterBound) {
  Rng gen(11);
  const auto cohort = RandomCohort(12, 5, gen);
  AnonymizedSet set;
  const auto centers = RandomCohort(3, 5, gen);
  for (int u = 0; u < 12; ++u) {
    set.group_of_user.push_back(u % 3);
    set.served.push_back(centers[u % 3]);
  }
  set.group_sizes = {4, 4, 4};
  Rng rng(12);
  auto est = DeanonProbability(cohort, set, 10, 0.2, 400, rng);
  ASSERT_TRUE(est.ok());
  EXPECT_GE(est->probability, 0.0);
  EXPECT_LE(est->probability, 0.25 + 1e-12);
}

TEST(DeanonProbability, MonotoneInAuxCells) {
  Rng gen(13);
  const auto cohort = RandomCohort(20, 5, gen);
  std::vector<double> cells, probs;
  for (int n = 1; n <= 25; ++n) {
    Rng rng(DeriveSeed(14, "attack", n));
    auto est = DeanonProbability(cohort, Unanonymized(cohort), n, 0.08, 200,
                                 rng);
    ASSERT_TRUE(est.ok());
    ASSERT_GE(est->probability, 0.0);
    ASSERT_LE(est->probability, 1.0);
    cells.push_back(n);
    probs.push_back(est->probability);
  }
  // Two-sided critical value for n = 25 at p < 0.01 is about 0.51.
  EXPECT_GT(SpearmanRho(cells, probs), 0.51);
}

TEST(DeanonProbability, ExactNearestNeighborRegime) {
  // Records whose cells differ pairwise by at least 0.01 everywhere.
  std::vector<TransitionMatrix> cohort;
  for (int u = 0; u < 10; ++u) {
    Matrix m(2, 2);
    const double p = 0.2 + 0.05 * u;
    m << p, 1 - p, 1 - p, p;
    cohort.push_back(*TransitionMatrix::FromMatrix(m));
  }
  Rng rng(15);
  for (int n = 1; n <= 4; ++n) {
    auto est =
        DeanonProbability(cohort, Unanonymized(cohort), n, 0.01, 50, rng);
    EXPECT_EQ(est->probability, 1.0);
  }
}

TEST(DeanonProbability, Validation) {
  Rng gen(16);
  const auto cohort = RandomCohort(4, 3, gen);
  AnonymizedSet bad = Unanonymized(cohort);
  bad.served.pop_back();
  Rng rng(1);
  EXPECT_FALSE(DeanonProbability(cohort, bad, 2, 0.001, 10, rng).ok());
  EXPECT_FALSE(
      DeanonProbability(cohort, Unanonymized(cohort), 2, 0.0, 10, rng).ok());
  EXPECT_FALSE(
      DeanonProbability(cohort, Unanonymized(cohort), 2, 0.001, 0, rng).ok());
}

TEST(ChanceBaseline, PresetCohorts) {
  EXPECT_NEAR(100 * ChanceBaseline(30), 3.3, 0.05);
  EXPECT_NEAR(100 * ChanceBaseline(50), 2.0, 0.05);
  EXPECT_NEAR(100 * ChanceBaseline(33), 3.0, 0.05);
}

}  // namespace
}  // namespace privbandit
