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


#include "privbandit/io.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace privbandit {
namespace {

using testing_util::RandomStochastic;
using testing_util::ScratchDir;

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.Normal() * std::pow(10.0, rng.UniformIndex(20) - 10.0);
    EXPECT_EQ(*ParseDouble(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(3.0), "3");
}

TEST(ParseNumbers, Strict) {
  EXPECT_FALSE(ParseDouble("").ok());
  EXPECT_FALSE(ParseDouble("1.5x").ok());
  EXPECT_FALSE(ParseInt("2.0").ok());
  EXPECT_EQ(*ParseInt("-12"), -12);
}

TEST(Csv, SplitAndQuote) {
  auto f = SplitCsvLine("a,\"b,c\",\"say \"\"hi\"\"\",");
  ASSERT_TRUE(f.ok());
  EXPECT_EQ(*f, (std::vector<std::string>{"a", "b,c", "say \"hi\"", ""}));
  EXPECT_EQ(CsvField("plain"), "plain");
  EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvField("q\""), "\"q\"\"\"");
  EXPECT_EQ(*SplitCsvLine(CsvField("x,\"y\"")),
            (std::vector<std::string>{"x,\"y\""}));
  EXPECT_FALSE(SplitCsvLine("\"open").ok());
}

TEST(EventCsv, ParsesTerminatorAndValidatesHeader) {
  auto events = ParseEventCsv(
      "user_id,timestamp_s,state\nu1,0,0\nu1,10.5,1\nu1,20,end\n");
  ASSERT_TRUE(events.ok());
  ASSERT_EQ(events->size(), 3u);
  EXPECT_EQ((*events)[1].timestamp_s, 10.5);
  EXPECT_EQ((*events)[2].state, kTerminatorState);
  EXPECT_FALSE(ParseEventCsv("user,time,state\nu,0,0\n").ok());
  EXPECT_FALSE(ParseEventCsv("user_id,timestamp_s,state\nu,abc,0\n").ok());
  EXPECT_FALSE(ParseEventCsv("user_id,timestamp_s,state\nu,0\n").ok());
}

TEST(MatrixFiles, CsvAndJsonRoundTrip) {
  Rng rng(2);
  const Matrix m = RandomStochastic(5, rng).matrix();
  EXPECT_EQ(*ParseMatrixCsv(MatrixToCsv(m)), m);
  EXPECT_EQ(*ParseMatrixJson(MatrixToJson(m)), m);
  EXPECT_FALSE(ParseMatrixCsv("0.5,0.5\n1\n").ok());
  EXPECT_FALSE(ParseMatrixJson("{\"d\": 3, \"rows\": [[1]]}").ok());

  const auto dir = ScratchDir("matrix_files");
  ASSERT_TRUE(WriteFile(dir / "m.json", MatrixToJson(m)).ok());
  ASSERT_TRUE(WriteFile(dir / "sub" / "m.csv", MatrixToCsv(m)).ok());
  EXPECT_EQ(*ReadMatrix(dir / "m.json"), m);
  EXPECT_EQ(ReadTransitionMatrix(dir / "sub" / "m.csv")->matrix(), m);
  ASSERT_TRUE(WriteFile(dir / "bad.csv", "0.5,0.6\n0.5,0.5\n").ok());
  EXPECT_FALSE(ReadTransitionMatrix(dir / "bad.csv").ok());
}

TEST(Profiles, CsvRoundTrip) {
  ProfileTable t;
  t.user_ids = {"a", "b,c"};
  t.features = {Eigen::Vector3d(1, 2.5, -3), Eigen::Vector3d(0, 0.1, 1e-9)};
  auto back = ParseProfilesCsv(ProfilesToCsv(t));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->user_ids, t.user_ids);
  EXPECT_EQ(back->features[1], t.features[1]);
  EXPECT_FALSE(ParseProfilesCsv("id,f0\na,1\n").ok());
}

TEST(Cohort, SaveLoadRoundTrip) {
  Rng rng(3);
  const auto dir = ScratchDir("cohort");
  const std::vector<std::string> ids = {"u0", "u1", "u2"};
  std::vector<TransitionMatrix> mats;
  std::vector<Eigen::VectorXd> profiles;
  for (int i = 0; i < 3; ++i) {
    mats.push_back(RandomStochastic(4, rng));
    profiles.push_back(Eigen::Vector2d(i, -i));
  }
  ASSERT_TRUE(
      SaveCohort(dir, ids, mats, profiles, {0, 1, 0}, {}, "test cohort").ok());
  auto loaded = LoadCohort(dir / "manifest.json");
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(loaded->manifest.user_ids, ids);
  EXPECT_EQ(loaded->manifest.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(loaded->manifest.description, "test cohort");
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(loaded->matrices[i], mats[i]);
    EXPECT_EQ(loaded->profiles[i], profiles[i]);
  }
}

TEST(Manifest, RejectsInconsistentInput) {
  EXPECT_FALSE(ParseManifestJson("[]").ok());
  EXPECT_FALSE(ParseManifestJson(
                   R"({"d": 2, "users": [{"id": "a"}]})")
                   .ok());
  EXPECT_FALSE(LoadCohort("/nonexistent/manifest.json").ok());
}

}  // namespace
}  // namespace privbandit
