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


// Random streams, transition matrices, summary statistics and the worker pool.

#include <atomic>
#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "privbandit/parallel.h"
#include "privbandit/random.h"
#include "privbandit/stats.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {
namespace {

TEST(DeriveSeed, StableAndSeparated) {
  EXPECT_EQ(DeriveSeed(7, "noise", 3), DeriveSeed(7, "noise", 3));
  std::set<uint64_t> seen;
  for (const char* stream :
       {"environment", "noise", "attack", "clustering", "episode"}) {
    for (uint64_t i = 0; i < 50; ++i) seen.insert(DeriveSeed(7, stream, i));
  }
  EXPECT_EQ(seen.size(), 250u);
  EXPECT_NE(DeriveSeed(7, "noise"), DeriveSeed(8, "noise"));
}

TEST(Rng, ReproducibleStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.Normal(), b.Normal());
}

TEST(Rng, UniformRangesAndMoments) {
  Rng rng(1);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double o = rng.UniformOpen();
    ASSERT_GT(o, 0.0);
    ASSERT_LT(o, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.003);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.UniformIndex(7)];
  for (int c : counts) EXPECT_NEAR(c / 70000.0, 1.0 / 7, 0.01);
}

TEST(Rng, LaplaceAndExponentialMoments) {
  Rng rng(2);
  const int n = 400000;
  double lsum = 0, lsq = 0, esum = 0;
  for (int i = 0; i < n; ++i) {
    const double l = rng.Laplace(0.5);
    lsum += l;
    lsq += l * l;
    esum += rng.Exponential();
  }
  EXPECT_NEAR(lsum / n, 0.0, 0.01);
  EXPECT_NEAR(lsq / n, 2 * 0.25, 0.01);
  EXPECT_NEAR(esum / n, 1.0, 0.01);
}

TEST(TransitionMatrix, FromMatrixValidation) {
  Matrix ok(2, 2);
  ok << 0.25, 0.75, 1, 0;
  EXPECT_TRUE(TransitionMatrix::FromMatrix(ok).ok());
  Matrix off = ok;
  off(0, 0) = 0.3;
  EXPECT_FALSE(TransitionMatrix::FromMatrix(off).ok());
  Matrix neg = ok;
  neg(0, 0) = -0.25;
  neg(0, 1) = 1.25;
  EXPECT_FALSE(TransitionMatrix::FromMatrix(neg).ok());
  EXPECT_FALSE(TransitionMatrix::FromMatrix(Matrix::Ones(2, 3)).ok());
  Matrix nan = ok;
  nan(1, 1) = NAN;
  EXPECT_FALSE(TransitionMatrix::FromMatrix(nan).ok());
}

TEST(TransitionMatrix, ToleranceRenormalizes) {
  Matrix near(2, 2);
  near << 0.5, 0.5 + 1e-8, 0.4, 0.6;
  auto t = TransitionMatrix::FromMatrix(near);
  ASSERT_TRUE(t.ok());
  EXPECT_LT(MaxRowSumDeviation(t->matrix()), 1e-12);
}

TEST(TransitionMatrix, FromNonNegativeImputesMissingRows) {
  Matrix m(3, 3);
  m << 2, 2, 0, 0, 0, 0, 1, 0, 3;
  const TransitionMatrix t = TransitionMatrix::FromNonNegative(m);
  EXPECT_EQ(t(0, 0), 0.5);
  EXPECT_EQ(t(1, 2), 1.0 / 3);
  EXPECT_EQ(t(2, 2), 0.75);
}

TEST(Stats, SummarizeSamples) {
  const std::vector<double> v = {1, 2, 3, 4};
  const MeanStderr s = SummarizeSamples(v);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std_error, std::sqrt(5.0 / 3 / 4), 1e-15);
  const std::vector<double> one = {3};
  EXPECT_EQ(SummarizeSamples(one).std_error, 0.0);
}

TEST(Stats, FractionalRanksAndSpearman) {
  const std::vector<double> v = {10, 20, 20, 5};
  EXPECT_EQ(FractionalRanks(v), (std::vector<double>{2, 3.5, 3.5, 1}));
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 8, 16, 32};
  const std::vector<double> down = {5, 3, 2, 1, 0};
  const std::vector<double> flat = {1, 1, 1, 1, 1};
  EXPECT_NEAR(SpearmanRho(x, up), 1.0, 1e-15);
  EXPECT_NEAR(SpearmanRho(x, down), -1.0, 1e-15);
  EXPECT_EQ(SpearmanRho(x, flat), 0.0);
  // Hand value: d = {1,-1,0,0,0}, rho = 1 - 6*2/(5*24) = 0.9.
  const std::vector<double> swap = {2, 1, 3, 4, 5};
  EXPECT_NEAR(SpearmanRho(x, swap), 0.9, 1e-15);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  for (int workers : {1, 3, 16}) {
    std::vector<std::atomic<int>> hits(100);
    ParallelFor(100, workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  EXPECT_GE(WorkerCountFromEnv(), 1);
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(ParallelFor(10, 4,
                           [](std::size_t i) {
                             if (i == 7) throw std::runtime_error("boom");
                           }),
               std::runtime_error);
}

}  // namespace
}  // namespace privbandit
