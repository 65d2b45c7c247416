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

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "absl/strings/str_format.h"
#include "nlohmann/json.hpp"

namespace privbandit {
namespace {

using nlohmann::json;

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

absl::StatusOr<json> ParseJson(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr,
                       /*allow_exceptions=*/false);
  if (j.is_discarded()) return absl::InvalidArgumentError("malformed JSON");
  return j;
}

absl::StatusOr<Matrix> MatrixFromRows(
    const std::vector<std::vector<double>>& rows) {
  const int d = static_cast<int>(rows.size());
  if (d == 0) return absl::InvalidArgumentError("matrix has no rows");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "matrix row %d has %d values, expected %d", i, rows[i].size(), d));
    }
    for (int j = 0; j < d; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

absl::StatusOr<double> ParseDouble(std::string_view text) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() ||
      result.ptr != text.data() + text.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("not a number: '%s'", std::string(text)));
  }
  return value;
}

absl::StatusOr<int> ParseInt(std::string_view text) {
  text = Trim(text);
  int value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() ||
      result.ptr != text.data() + text.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("not an integer: '%s'", std::string(text)));
  }
  return value;
}

absl::StatusOr<std::vector<std::string>> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return absl::InvalidArgumentError("unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::string CsvField(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        absl::StrFormat("cannot open %s", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      return absl::PermissionDeniedError(absl::StrFormat(
          "cannot create %s: %s", path.parent_path().string(), ec.message()));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrFormat("cannot write %s", path.string()));
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    return absl::DataLossError(
        absl::StrFormat("short write to %s", path.string()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Event>> ParseEventCsv(std::string_view text) {
  const std::vector<std::string_view> lines = Lines(text);
  if (lines.empty() || Trim(lines.front()) != "user_id,timestamp_s,state") {
    return absl::InvalidArgumentError(
        "event log must start with header user_id,timestamp_s,state");
  }
  std::vector<Event> events;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (Trim(lines[n]).empty()) continue;
    absl::StatusOr<std::vector<std::string>> fields = SplitCsvLine(lines[n]);
    if (!fields.ok() || fields->size() != 3) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected 3 fields", n + 1));
    }
    Event e;
    e.user_id = std::string(Trim((*fields)[0]));
    if (e.user_id.empty()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: empty user id", n + 1));
    }
    absl::StatusOr<double> t = ParseDouble((*fields)[1]);
    if (!t.ok()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: %s", n + 1, t.status().message()));
    }
    e.timestamp_s = *t;
    const std::string_view state = Trim((*fields)[2]);
    if (state == "end") {
      e.state = kTerminatorState;
    } else {
      absl::StatusOr<int> s = ParseInt(state);
      if (!s.ok()) {
        return absl::InvalidArgumentError(
            absl::StrFormat("line %d: %s", n + 1, s.status().message()));
      }
      e.state = *s;
    }
    events.push_back(std::move(e));
  }
  return events;
}

absl::StatusOr<std::vector<Event>> ReadEventCsv(
    const std::filesystem::path& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  return ParseEventCsv(*text);
}

std::string MatrixToCsv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += FormatDouble(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<Matrix> ParseMatrixCsv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (std::string_view line : Lines(text)) {
    absl::StatusOr<std::vector<std::string>> fields = SplitCsvLine(line);
    if (!fields.ok()) return fields.status();
    std::vector<double>& row = rows.emplace_back();
    for (const std::string& f : *fields) {
      absl::StatusOr<double> v = ParseDouble(f);
      if (!v.ok()) return v.status();
      row.push_back(*v);
    }
  }
  return MatrixFromRows(rows);
}

std::string MatrixToJson(const Matrix& m) {
  std::string out = absl::StrFormat("{\"d\": %d, \"rows\": [", m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += ", ";
    out.push_back('[');
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ", ";
      out += FormatDouble(m(i, j));
    }
    out.push_back(']');
  }
  out += "]}\n";
  return out;
}

absl::StatusOr<Matrix> ParseMatrixJson(std::string_view text) {
  absl::StatusOr<json> j = ParseJson(text);
  if (!j.ok()) return j.status();
  if (!j->is_object() || !j->contains("d") || !j->contains("rows") ||
      !(*j)["d"].is_number_integer() || !(*j)["rows"].is_array()) {
    return absl::InvalidArgumentError(
        "matrix JSON needs integer \"d\" and array \"rows\"");
  }
  std::vector<std::vector<double>> rows;
  for (const json& row : (*j)["rows"]) {
    if (!row.is_array()) {
      return absl::InvalidArgumentError("matrix rows must be arrays");
    }
    std::vector<double>& r = rows.emplace_back();
    for (const json& v : row) {
      if (!v.is_number()) {
        return absl::InvalidArgumentError("matrix entries must be numbers");
      }
      r.push_back(v.get<double>());
    }
  }
  absl::StatusOr<Matrix> m = MatrixFromRows(rows);
  if (!m.ok()) return m.status();
  if (m->rows() != (*j)["d"].get<int>()) {
    return absl::InvalidArgumentError("\"d\" disagrees with the row count");
  }
  return m;
}

absl::StatusOr<Matrix> ReadMatrix(const std::filesystem::path& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<Matrix> m = path.extension() == ".json"
                                 ? ParseMatrixJson(*text)
                                 : ParseMatrixCsv(*text);
  if (!m.ok()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s: %s", path.string(), m.status().message()));
  }
  return m;
}

absl::StatusOr<TransitionMatrix> ReadTransitionMatrix(
    const std::filesystem::path& path) {
  absl::StatusOr<Matrix> m = ReadMatrix(path);
  if (!m.ok()) return m.status();
  absl::StatusOr<TransitionMatrix> t = TransitionMatrix::FromMatrix(*m);
  if (!t.ok()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s: %s", path.string(), t.status().message()));
  }
  return t;
}

std::string ProfilesToCsv(const ProfileTable& table) {
  const Eigen::Index p =
      table.features.empty() ? 0 : table.features.front().size();
  std::string out = "user_id";
  for (Eigen::Index k = 0; k < p; ++k) absl::StrAppendFormat(&out, ",f%d", k);
  out.push_back('\n');
  for (std::size_t u = 0; u < table.user_ids.size(); ++u) {
    out += CsvField(table.user_ids[u]);
    for (Eigen::Index k = 0; k < table.features[u].size(); ++k) {
      out.push_back(',');
      out += FormatDouble(table.features[u][k]);
    }
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<ProfileTable> ParseProfilesCsv(std::string_view text) {
  const std::vector<std::string_view> lines = Lines(text);
  if (lines.empty()) return absl::InvalidArgumentError("empty profile file");
  absl::StatusOr<std::vector<std::string>> header = SplitCsvLine(lines[0]);
  if (!header.ok() || header->empty() || (*header)[0] != "user_id") {
    return absl::InvalidArgumentError(
        "profile file must start with header user_id,f0,...");
  }
  for (std::size_t k = 1; k < header->size(); ++k) {
    if ((*header)[k] != absl::StrFormat("f%d", k - 1)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("unexpected profile column '%s'", (*header)[k]));
    }
  }
  const std::size_t p = header->size() - 1;
  ProfileTable table;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    absl::StatusOr<std::vector<std::string>> fields = SplitCsvLine(lines[n]);
    if (!fields.ok() || fields->size() != p + 1) {
      return absl::InvalidArgumentError(
          absl::StrFormat("profile line %d: expected %d fields", n + 1, p + 1));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < p; ++k) {
      absl::StatusOr<double> x = ParseDouble((*fields)[k + 1]);
      if (!x.ok()) return x.status();
      v[static_cast<Eigen::Index>(k)] = *x;
    }
    table.user_ids.push_back((*fields)[0]);
    table.features.push_back(std::move(v));
  }
  return table;
}

std::string ManifestToJson(const CohortManifest& manifest) {
  json j = json::object();
  j["d"] = manifest.d;
  j["description"] = manifest.description;
  json users = json::array();
  for (std::size_t u = 0; u < manifest.user_ids.size(); ++u) {
    json entry = {{"id", manifest.user_ids[u]},
                  {"matrix", manifest.matrix_files[u]}};
    if (!manifest.labels.empty()) entry["label"] = manifest.labels[u];
    if (!manifest.groups.empty()) entry["group"] = manifest.groups[u];
    users.push_back(std::move(entry));
  }
  j["users"] = std::move(users);
  if (manifest.profiles_file) j["profiles"] = *manifest.profiles_file;
  return j.dump(2) + "\n";
}

absl::StatusOr<CohortManifest> ParseManifestJson(std::string_view text) {
  absl::StatusOr<json> j = ParseJson(text);
  if (!j.ok()) return j.status();
  if (!j->is_object() || !j->contains("d") || !j->contains("users") ||
      !(*j)["users"].is_array() || !(*j)["d"].is_number_integer()) {
    return absl::InvalidArgumentError(
        "manifest needs integer \"d\" and array \"users\"");
  }
  CohortManifest m;
  m.d = (*j)["d"].get<int>();
  if (j->contains("description") && (*j)["description"].is_string()) {
    m.description = (*j)["description"].get<std::string>();
  }
  bool any_label = false, any_group = false;
  for (const json& u : (*j)["users"]) {
    if (!u.is_object() || !u.contains("id") || !u.contains("matrix") ||
        !u["id"].is_string() || !u["matrix"].is_string()) {
      return absl::InvalidArgumentError(
          "manifest users need string \"id\" and \"matrix\"");
    }
    m.user_ids.push_back(u["id"].get<std::string>());
    m.matrix_files.push_back(u["matrix"].get<std::string>());
    const bool has_label =
        u.contains("label") && u["label"].is_number_integer();
    const bool has_group =
        u.contains("group") && u["group"].is_number_integer();
    any_label |= has_label;
    any_group |= has_group;
    m.labels.push_back(has_label ? u["label"].get<int>() : -1);
    m.groups.push_back(has_group ? u["group"].get<int>() : -1);
  }
  if (!any_label) m.labels.clear();
  if (!any_group) m.groups.clear();
  for (int g : m.groups) {
    if (g < 0) {
      return absl::InvalidArgumentError("manifest groups are incomplete");
    }
  }
  if (j->contains("profiles")) {
    if (!(*j)["profiles"].is_string()) {
      return absl::InvalidArgumentError("\"profiles\" must be a path");
    }
    m.profiles_file = (*j)["profiles"].get<std::string>();
  }
  return m;
}

absl::StatusOr<LoadedCohort> LoadCohort(const std::filesystem::path& manifest) {
  absl::StatusOr<std::string> text = ReadFile(manifest);
  if (!text.ok()) return text.status();
  absl::StatusOr<CohortManifest> parsed = ParseManifestJson(*text);
  if (!parsed.ok()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s: %s", manifest.string(), parsed.status().message()));
  }
  LoadedCohort out;
  out.manifest = *std::move(parsed);
  const std::filesystem::path dir = manifest.parent_path();
  for (const std::string& file : out.manifest.matrix_files) {
    absl::StatusOr<TransitionMatrix> m = ReadTransitionMatrix(dir / file);
    if (!m.ok()) return m.status();
    if (m->dim() != out.manifest.d) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s is %dx%d, manifest says d = %d", file, m->dim(), m->dim(),
          out.manifest.d));
    }
    out.matrices.push_back(*std::move(m));
  }
  if (out.manifest.profiles_file) {
    absl::StatusOr<std::string> ptext =
        ReadFile(dir / *out.manifest.profiles_file);
    if (!ptext.ok()) return ptext.status();
    absl::StatusOr<ProfileTable> table = ParseProfilesCsv(*ptext);
    if (!table.ok()) return table.status();
    // Align profiles to manifest order by user id.
    for (const std::string& id : out.manifest.user_ids) {
      bool found = false;
      for (std::size_t k = 0; k < table->user_ids.size(); ++k) {
        if (table->user_ids[k] == id) {
          out.profiles.push_back(table->features[k]);
          found = true;
          break;
        }
      }
      if (!found) {
        return absl::InvalidArgumentError(
            absl::StrFormat("no profile for user '%s'", id));
      }
    }
  }
  return out;
}

absl::Status SaveCohort(const std::filesystem::path& dir,
                        const std::vector<std::string>& user_ids,
                        const std::vector<TransitionMatrix>& matrices,
                        const std::vector<Eigen::VectorXd>& profiles,
                        const std::vector<int>& labels,
                        const std::vector<int>& groups,
                        std::string_view description) {
  if (matrices.size() != user_ids.size() || matrices.empty()) {
    return absl::InvalidArgumentError("one matrix per user id required");
  }
  CohortManifest manifest;
  manifest.d = matrices.front().dim();
  manifest.user_ids = user_ids;
  manifest.labels = labels;
  manifest.groups = groups;
  manifest.description = std::string(description);
  for (std::size_t u = 0; u < user_ids.size(); ++u) {
    const std::string file = "matrices/" + user_ids[u] + ".csv";
    if (absl::Status s =
            WriteFile(dir / file, MatrixToCsv(matrices[u].matrix()));
        !s.ok()) {
      return s;
    }
    manifest.matrix_files.push_back(file);
  }
  if (!profiles.empty()) {
    ProfileTable table{user_ids, profiles};
    if (absl::Status s = WriteFile(dir / "profiles.csv", ProfilesToCsv(table));
        !s.ok()) {
      return s;
    }
    manifest.profiles_file = "profiles.csv";
  }
  return WriteFile(dir / "manifest.json", ManifestToJson(manifest));
}

}  // namespace privbandit
