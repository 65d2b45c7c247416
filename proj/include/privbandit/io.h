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

// File formats: event-log CSV, matrix CSV/JSON, profile CSV and the cohort
// manifest. Numbers are written in shortest round-trip form so reruns are
// byte-identical.

#ifndef PRIVBANDIT_IO_H_
#define PRIVBANDIT_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "privbandit/ingest.h"
#include "privbandit/transition_matrix.h"

namespace privbandit {

// Shortest decimal that parses back to exactly `value`.
std::string FormatDouble(double value);
absl::StatusOr<double> ParseDouble(std::string_view text);
absl::StatusOr<int> ParseInt(std::string_view text);

// Splits one CSV line, honoring double-quoted fields.
absl::StatusOr<std::vector<std::string>> SplitCsvLine(std::string_view line);
// Quotes a field if it contains a comma, quote or line break.
std::string CsvField(std::string_view field);

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);
// Creates parent directories as needed.
absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view contents);

// Header `user_id,timestamp_s,state`; state "end" marks a terminator.
absl::StatusOr<std::vector<Event>> ParseEventCsv(std::string_view text);
absl::StatusOr<std::vector<Event>> ReadEventCsv(
    const std::filesystem::path& path);

// d rows of d comma-separated values, no header.
std::string MatrixToCsv(const Matrix& m);
absl::StatusOr<Matrix> ParseMatrixCsv(std::string_view text);
// {"d": d, "rows": [[...], ...]}
std::string MatrixToJson(const Matrix& m);
absl::StatusOr<Matrix> ParseMatrixJson(std::string_view text);
// Dispatches on the extension (.json or anything else as CSV).
absl::StatusOr<Matrix> ReadMatrix(const std::filesystem::path& path);
absl::StatusOr<TransitionMatrix> ReadTransitionMatrix(
    const std::filesystem::path& path);

struct ProfileTable {
  std::vector<std::string> user_ids;
  std::vector<Eigen::VectorXd> features;
};

// Header `user_id,f0,f1,...`.
std::string ProfilesToCsv(const ProfileTable& table);
absl::StatusOr<ProfileTable> ParseProfilesCsv(std::string_view text);

// A cohort on disk: manifest.json lists users with their matrix files
// (relative to the manifest), optional profile CSV, labels and groups.
struct CohortManifest {
  int d = 0;
  std::vector<std::string> user_ids;
  std::vector<std::string> matrix_files;
  std::optional<std::string> profiles_file;
  std::vector<int> labels;  // empty when unknown
  std::vector<int> groups;  // release groups; empty for true cohorts
  std::string description;
};

std::string ManifestToJson(const CohortManifest& manifest);
absl::StatusOr<CohortManifest> ParseManifestJson(std::string_view text);

struct LoadedCohort {
  CohortManifest manifest;
  std::vector<TransitionMatrix> matrices;
  std::vector<Eigen::VectorXd> profiles;  // aligned with users, may be empty
};

absl::StatusOr<LoadedCohort> LoadCohort(const std::filesystem::path& manifest);

// Writes matrices/<id>.csv, profiles.csv (if any profiles) and manifest.json
// under `dir`.
absl::Status SaveCohort(const std::filesystem::path& dir,
                        const std::vector<std::string>& user_ids,
                        const std::vector<TransitionMatrix>& matrices,
                        const std::vector<Eigen::VectorXd>& profiles,
                        const std::vector<int>& labels,
                        const std::vector<int>& groups,
                        std::string_view description);

}  // namespace privbandit

#endif  // PRIVBANDIT_IO_H_
