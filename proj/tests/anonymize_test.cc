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


#include "privbandit/anonymize.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "Eigen/Eigenvalues"
#include "gtest/gtest.h"
#include "privbandit/harness.h"
#include "privbandit/ingest.h"
#include "test_util.h"

namespace privbandit {
namespace {

using testing_util::RandomCohort;
using testing_util::RandomGaussian;
using testing_util::RandomStochastic;

// Squared singular values from the Gram matrix, descending.
Eigen::VectorXd SquaredSingularValues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.transpose() * m);
  Eigen::VectorXd ev = solver.eigenvalues().reverse();
  return ev.cwiseMax(0.0);
}

TEST(StrategyNames, RoundTrip) {
  for (StrategyKind kind :
       {StrategyKind::kNone, StrategyKind::kLaplace, StrategyKind::kTsvd,
        StrategyKind::kGlobalAverage, StrategyKind::kClusterAverage,
        StrategyKind::kNearestNeighbor,
        StrategyKind::kSecondNearestNeighbor}) {
    EXPECT_EQ(*ParseStrategyKind(StrategyName(kind)), kind);
  }
  EXPECT_FALSE(ParseStrategyKind("median").ok());
}

TEST(LaplacePerturb, ZeroEpsilonAndZeroWeights) {
  Rng gen(1);
  const Record r = RandomGaussian(4, 4, gen);
  Rng rng(2);
  EXPECT_EQ(*LaplacePerturb(r, WeightVector::Ones(16), 0.0, rng), r);
  EXPECT_EQ(*LaplacePerturb(r, WeightVector::Zero(16), 2.5, rng), r);
}

TEST(LaplacePerturb, Errors) {
  Rng rng(3);
  const Record r = Record::Zero(2, 2);
  EXPECT_FALSE(LaplacePerturb(r, WeightVector::Ones(4), -0.1, rng).ok());
  EXPECT_FALSE(LaplacePerturb(r, WeightVector::Ones(3), 0.1, rng).ok());
}

TEST(LaplacePerturb, VarianceEqualsEpsilon) {
  Rng rng(4);
  const Record r = Record::Zero(10, 10);
  const WeightVector w = WeightVector::Ones(100);
  double sum = 0, sq = 0;
  const int reps = 10000;  // 10^6 draws
  for (int i = 0; i < reps; ++i) {
    const Record z = *LaplacePerturb(r, w, 1.0, rng);
    sum += z.sum();
    sq += z.squaredNorm();
  }
  const double n = reps * 100.0;
  const double mean = sum / n;
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.05);
}

TEST(LaplacePerturb, NoiseMeanIsZeroPerCell) {
  Rng rng(5);
  const int d = 3;
  const Record r = Record::Constant(d, d, 0.25);
  WeightVector w(d * d);
  for (int i = 0; i < d * d; ++i) w[i] = 0.5 + i;
  const double eps = 0.7;
  const int draws = 100000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d * d);
  for (int t = 0; t < draws; ++t) {
    const Record z = *LaplacePerturb(r, w, eps, rng);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        acc[FlatCell(i, j, d)] += (z(i, j) - r(i, j)) / w[FlatCell(i, j, d)];
      }
    }
  }
  const double se = std::sqrt(eps / draws);
  for (int c = 0; c < d * d; ++c) EXPECT_LT(std::fabs(acc[c] / draws), 3 * se);
}

TEST(TsvdTruncate, FullRankAndRankOne) {
  Rng rng(6);
  const Record r = RandomGaussian(5, 5, rng);
  EXPECT_LT((*TsvdTruncate(r, 5) - r).norm(), 1e-9);
  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(4, 1, 4);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, -2, 1);
  const Record outer = u * v.transpose();
  EXPECT_LT((*TsvdTruncate(outer, 1) - outer).norm(), 1e-12);
}

TEST(TsvdTruncate, ErrorMatchesTailOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Record r = RandomGaussian(5, 5, rng);
    const Eigen::VectorXd s2 = SquaredSingularValues(r);
    const double tail = s2.tail(2).sum();
    const double err = (*TsvdTruncate(r, 3) - r).squaredNorm();
    EXPECT_NEAR(err, tail, 1e-9);
  }
}

TEST(TsvdTruncate, RankAndRange) {
  Rng rng(8);
  const Record r = RandomGaussian(6, 6, rng);
  Eigen::FullPivLU<Matrix> lu(*TsvdTruncate(r, 2));
  lu.setThreshold(1e-10);
  EXPECT_EQ(lu.rank(), 2);
  EXPECT_FALSE(TsvdTruncate(r, 0).ok());
  EXPECT_FALSE(TsvdTruncate(r, 7).ok());
}

TEST(TsvdTruncate, NoRandomRankKMatrixDoesBetter) {
  Rng rng(9);
  const int d = 6, k = 2;
  const Record r = RandomStochastic(d, rng).matrix();
  const Record best = *TsvdTruncate(r, k);
  const double best_err = (r - best).norm();
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix left = svd.matrixU().leftCols(k) *
                      svd.singularValues().head(k).asDiagonal();
  const Matrix right = svd.matrixV().leftCols(k).transpose();
  for (int t = 0; t < 100; ++t) {
    // Half fully random, half small perturbations of the optimum's factors.
    Matrix cand;
    if (t % 2 == 0) {
      cand = RandomGaussian(d, k, rng) * RandomGaussian(k, d, rng) * 0.2;
    } else {
      const double step = 1e-3 * (1 + t);
      cand = (left + step * RandomGaussian(d, k, rng)) *
             (right + step * RandomGaussian(k, d, rng));
    }
    EXPECT_GE((r - cand).norm(), best_err - 1e-12);
  }
}

TEST(NormalizePipeline, Examples) {
  Record r(2, 2);
  r << 0.5, -0.2, 0.3, 0.4;
  Matrix want(2, 2);
  want << 1, 0, 3.0 / 7, 4.0 / 7;
  EXPECT_LT((NormalizePipeline(r).matrix() - want).norm(), 1e-12);
  EXPECT_LT((NormalizePipeline(Record::Constant(3, 3, -1)).matrix() -
             Matrix::Constant(3, 3, 1.0 / 3))
                .norm(),
            1e-15);
  Rng rng(10);
  const Matrix s = RandomStochastic(5, rng).matrix();
  EXPECT_LT((NormalizePipeline(s).matrix() - s).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(NormalizePipeline(Record::Zero(2, 2)).matrix(),
            Matrix::Constant(2, 2, 0.5));
}

TEST(AggregateGlobal, Examples) {
  Rng rng(11);
  const Record r = RandomGaussian(3, 3, rng);
  const std::vector<Record> same(4, r);
  EXPECT_LT((*AggregateGlobal(same) - r).norm(), 1e-15);
  Record a(2, 2), b(2, 2);
  a << 1, 0, 0, 1;
  b << 0, 1, 1, 0;
  const std::vector<Record> pair = {a, b};
  EXPECT_EQ(*AggregateGlobal(pair), Record::Constant(2, 2, 0.5));
  EXPECT_FALSE(AggregateGlobal({}).ok());
}

TEST(AggregateGlobal, MatchesPerCellSum) {
  Rng rng(12);
  std::vector<Record> records;
  for (int i = 0; i < 30; ++i) records.push_back(RandomGaussian(4, 4, rng));
  const Record got = *AggregateGlobal(records);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0;
      for (const Record& r : records) s += r(i, j);
      EXPECT_NEAR(got(i, j), s / 30, 1e-14);
    }
  }
}

TEST(AggregateClusters, Consistency) {
  Rng rng(13);
  std::vector<Record> records;
  for (int i = 0; i < 9; ++i) records.push_back(RandomGaussian(3, 3, rng));
  const std::vector<int> one(9, 0);
  auto all = AggregateClusters(records, one, 1);
  ASSERT_TRUE(all.ok());
  EXPECT_LT((all->means[0] - *AggregateGlobal(records)).norm(), 1e-14);
  std::vector<int> own(9);
  std::iota(own.begin(), own.end(), 0);
  auto singles = AggregateClusters(records, own, 9);
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(singles->means[i], records[i]);
    EXPECT_EQ(singles->sizes[i], 1);
  }
}

TEST(AggregateClusters, MatchesBruteForceGrouping) {
  Rng rng(14);
  std::vector<Record> records;
  std::vector<int> labels;
  for (int i = 0; i < 9; ++i) {
    records.push_back(RandomGaussian(3, 3, rng));
    labels.push_back((i * 7) % 3);
  }
  auto got = AggregateClusters(records, labels, 3);
  ASSERT_TRUE(got.ok());
  for (int c = 0; c < 3; ++c) {
    Record sum = Record::Zero(3, 3);
    int count = 0;
    for (int i = 0; i < 9; ++i) {
      if (labels[i] != c) continue;
      sum += records[i];
      ++count;
    }
    EXPECT_EQ(got->sizes[c], count);
    EXPECT_LT((got->means[c] - sum / count).norm(), 1e-14);
  }
  const std::vector<int> gap = {0, 0, 2, 2, 0, 0, 2, 2, 0};
  EXPECT_FALSE(AggregateClusters(records, gap, 3).ok());
}

TEST(AggregateClusters, PermutationInvariant) {
  Rng rng(15);
  std::vector<Record> records;
  std::vector<int> labels;
  for (int i = 0; i < 12; ++i) {
    records.push_back(RandomGaussian(4, 4, rng));
    labels.push_back(i % 4);
  }
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[7]);
  std::vector<Record> shuffled;
  std::vector<int> shuffled_labels;
  for (int p : perm) {
    shuffled.push_back(records[p]);
    shuffled_labels.push_back(labels[p]);
  }
  auto a = AggregateClusters(records, labels, 4);
  auto b = AggregateClusters(shuffled, shuffled_labels, 4);
  for (int c = 0; c < 4; ++c) {
    EXPECT_LT((a->means[c] - b->means[c]).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_LT((*AggregateGlobal(records) - *AggregateGlobal(shuffled))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(NearestNeighbor, Examples) {
  std::vector<Eigen::VectorXd> profiles = {Eigen::VectorXd::Constant(2, 0),
                                           Eigen::VectorXd::Constant(2, 5),
                                           Eigen::VectorXd::Constant(2, 1)};
  EXPECT_EQ(*NearestNeighborIndex(profiles, 0, 1), 2);
  // Ties: 1 and 2 are both at distance 1 from 0; rank 2 picks index 2.
  std::vector<Eigen::VectorXd> tied(4, Eigen::VectorXd::Zero(1));
  tied[1][0] = 1;
  tied[2][0] = -1;
  tied[3][0] = 3;
  EXPECT_EQ(*NearestNeighborIndex(tied, 0, 1), 1);
  EXPECT_EQ(*NearestNeighborIndex(tied, 0, 2), 2);
  const std::vector<Eigen::VectorXd> two(2, Eigen::VectorXd::Zero(1));
  EXPECT_FALSE(NearestNeighborIndex(two, 0, 2).ok());
}

TEST(NearestNeighbor, MatchesExhaustiveSort) {
  Rng rng(16);
  std::vector<Eigen::VectorXd> profiles;
  std::vector<Record> records;
  for (int i = 0; i < 10; ++i) {
    profiles.push_back(RandomGaussian(5, 1, rng).col(0));
    records.push_back(Record::Constant(2, 2, i));
  }
  for (int q = 0; q < 10; ++q) {
    std::vector<std::pair<double, int>> all;
    for (int i = 0; i < 10; ++i) {
      if (i != q) all.emplace_back((profiles[i] - profiles[q]).norm(), i);
    }
    std::sort(all.begin(), all.end());
    for (int rank : {1, 2}) {
      EXPECT_EQ(*NearestNeighborIndex(profiles, q, rank), all[rank - 1].second);
      EXPECT_EQ((*NnRecord(profiles, q, records, rank))(0, 0),
                all[rank - 1].second);
    }
  }
}

Cohort SyntheticTestCohort(int users, int states, int base_k, uint64_t seed) {
  SynthOptions options;
  options.users = users;
  options.states = states;
  options.seed = seed;
  auto synth = SynthCohort(options);
  Cohort c;
  c.matrices = synth->matrices;
  c.profiles = synth->profiles;
  c.cluster_base_k = base_k;
  c.clustering_seed = seed + 1;
  return c;
}

TEST(ApplyStrategy, NoneIsIdempotent) {
  const Cohort c = SyntheticTestCohort(6, 5, 2, 1);
  Rng rng(1);
  StrategySpec spec;
  auto out = ApplyStrategy(c, spec, WeightVector::Ones(25), rng);
  ASSERT_TRUE(out.ok());
  for (int u = 0; u < 6; ++u) {
    EXPECT_LT((out->served[u].matrix() - c.matrices[u].matrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
    EXPECT_EQ(out->group_sizes[out->group_of_user[u]], 1);
  }
}

TEST(ApplyStrategy, GlobalAverageSharesOneRecord) {
  const Cohort c = SyntheticTestCohort(5, 4, 2, 2);
  Rng rng(2);
  StrategySpec spec;
  spec.kind = StrategyKind::kGlobalAverage;
  auto out = ApplyStrategy(c, spec, WeightVector::Ones(16), rng);
  ASSERT_TRUE(out.ok());
  for (int u = 0; u < 5; ++u) {
    EXPECT_EQ(out->served[u], out->served[0]);
    EXPECT_EQ(out->group_sizes[out->group_of_user[u]], 5);
  }
}

TEST(ApplyStrategy, DoubledClustersOnCasasPreset) {
  auto preset = FindDatasetPreset("casas");
  ASSERT_TRUE(preset.ok());
  ASSERT_EQ(preset->cluster_base_k, 7);
  const Cohort c =
      SyntheticTestCohort(preset->users, preset->states, preset->cluster_base_k,
                          3);
  Rng rng(3);
  StrategySpec spec;
  spec.kind = StrategyKind::kClusterAverage;
  spec.multiplier = 2;
  auto out = ApplyStrategy(c, spec, WeightVector::Ones(41 * 41), rng);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out->group_sizes.size(), 14u);
  EXPECT_EQ(std::accumulate(out->group_sizes.begin(), out->group_sizes.end(),
                            0),
            30);
  for (int u = 0; u < 30; ++u) {
    for (int v = 0; v < 30; ++v) {
      if (out->group_of_user[u] == out->group_of_user[v]) {
        EXPECT_EQ(out->served[u], out->served[v]);
      }
    }
  }
}

TEST(ApplyStrategy, ServedAlwaysStochastic) {
  const Cohort c = SyntheticTestCohort(12, 6, 3, 4);
  Rng rng(5);
  const StrategyKind kinds[] = {
      StrategyKind::kNone,           StrategyKind::kLaplace,
      StrategyKind::kTsvd,           StrategyKind::kGlobalAverage,
      StrategyKind::kClusterAverage, StrategyKind::kNearestNeighbor,
      StrategyKind::kSecondNearestNeighbor};
  for (int trial = 0; trial < 70; ++trial) {
    StrategySpec spec;
    spec.kind = kinds[trial % 7];
    spec.epsilon = rng.Uniform() * 3;
    spec.rank = 1 + static_cast<int>(rng.UniformIndex(6));
    if (trial % 3 == 0) spec.post_noise = rng.Uniform() * 3;
    if (trial % 4 == 0) {
      spec.post_rank = 1 + static_cast<int>(rng.UniformIndex(6));
    }
    WeightVector w(36);
    for (int i = 0; i < 36; ++i) w[i] = rng.Exponential() * 10;
    auto out = ApplyStrategy(c, spec, w, rng);
    ASSERT_TRUE(out.ok()) << DescribeStrategy(spec) << out.status();
    for (const auto& m : out->served) {
      EXPECT_LT(MaxRowSumDeviation(m.matrix()), 1e-9);
      EXPECT_GE(m.matrix().minCoeff(), 0.0);
      EXPECT_LE(m.matrix().maxCoeff(), 1.0);
    }
  }
}

TEST(ApplyStrategy, DeterministicUnderSeed) {
  const Cohort c = SyntheticTestCohort(8, 4, 2, 6);
  StrategySpec spec;
  spec.kind = StrategyKind::kClusterAverage;
  spec.post_noise = 0.5;
  Rng a(7), b(7);
  auto x = ApplyStrategy(c, spec, WeightVector::Ones(16), a);
  auto y = ApplyStrategy(c, spec, WeightVector::Ones(16), b);
  for (int u = 0; u < 8; ++u) EXPECT_EQ(x->served[u], y->served[u]);
}

}  // namespace
}  // namespace privbandit
