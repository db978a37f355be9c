// Copyright 2026 The rprct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV datasets and truth sidecars, JSON configs, and report rendering.

#ifndef RPRCT_DATAIO_HPP_
#define RPRCT_DATAIO_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rprct/dataset.hpp"
#include "rprct/design.hpp"
#include "rprct/estimate.hpp"
#include "rprct/simulate.hpp"

namespace rprct::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV

// RFC 4180 records (quoted fields, doubled quotes, CRLF or LF endings).
std::vector<std::vector<std::string>> ParseCsv(const std::string& text);
std::string CsvField(const std::string& value);

struct ColumnSpec {
  std::string name;
  CovariateKind kind;
  // Categorical level order; when empty, levels are sorted (numerically if
  // every level is a number).
  std::vector<std::string> levels;
};

struct DatasetSchema {
  std::optional<std::string> id_column;
  std::vector<std::string> outcome_columns{"y_tilde"};
  std::vector<ColumnSpec> covariates;
  std::string missing_token;
  // Accept covariate columns that are not declared, inferring their kind. In
  // this mode a column named "id" is taken as the id column unless another
  // id column is declared.
  bool infer_covariates = false;

  static DatasetSchema FromJson(const Json& json);
  Json ToJson() const;
};

struct ReadSummary {
  std::size_t rows = 0;
  std::vector<std::pair<std::string, std::size_t>> missing;  // per column
};

StudyTable ReadStudyCsv(const std::string& text, const DatasetSchema& schema,
                        ReadSummary* summary = nullptr);
StudyTable ReadStudy(const std::filesystem::path& path,
                     const DatasetSchema& schema, ReadSummary* summary = nullptr);

// Single-outcome convenience: requires exactly one outcome column.
PrivateDataset ReadDataset(const std::filesystem::path& path,
                           const DatasetSchema& schema,
                           ReadSummary* summary = nullptr);

// Column order: id (if present), s, a, y_tilde, covariates.
std::string FormatDatasetCsv(const PrivateDataset& data,
                             const std::string& missing_token = "");
void WriteDataset(const PrivateDataset& data, const std::filesystem::path& path,
                  const std::string& missing_token = "");

// Columns: id, s, a, y1, y0, c, behavior, p (prompt).
std::string FormatSidecarCsv(const TruthSidecar& truth);
void WriteSidecar(const TruthSidecar& truth, const std::filesystem::path& path);
TruthSidecar ReadSidecar(const std::filesystem::path& path);

// Schema matching what FormatDatasetCsv writes for `data`.
DatasetSchema SchemaFor(const PrivateDataset& data);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& contents);

// Shortest-exact decimal form used for CSV floats (17 significant digits).
std::string FormatDouble(double value);

// ---------------------------------------------------------------------------
// JSON documents. Parse errors throw kSchema with a JSON pointer in the text.

Json ToJson(const FrrParams& params);
FrrParams FrrFromJson(const Json& json, const std::string& pointer = "");
Json EpsilonToJson(const PrivacyLoss& loss);

// Accepts {"delta", "frr1", "frr2"} or {"delta", "epsilon", "gap"}.
DesignSpec DesignFromJson(const Json& json, const std::string& pointer = "");
Json ToJson(const DesignSpec& spec);
Json ToJson(const EfficiencyQuote& quote);
Json ToJson(const DesignReport& report);

PopulationConfig PopulationFromJson(const Json& json,
                                    const std::string& pointer = "");
Json ToJson(const PopulationConfig& config);

// Top-level simulation document {"population": ..., "design": ...}.
struct SimulationConfig {
  PopulationConfig population;
  DesignSpec design;
};
SimulationConfig SimulationFromJson(const Json& json);

Json ToJson(const MonteCarloSummary& summary);

Json ToJson(const CheaterEstimate& estimate);
CheaterEstimate CheaterEstimateFromJson(const Json& json);
Json ToJson(const EffectEstimate& estimate);
EffectEstimate EffectEstimateFromJson(const Json& json);
Json ToJson(const EstimateReport& report);
EstimateReport EstimateReportFromJson(const Json& json);

enum class ReportFormat { kJson, kMarkdown, kCsv };
ReportFormat ParseReportFormat(const std::string& name);

// Renders per-outcome reports. Markdown is the four-column results table
// (Outcome | lambda (se) | tau_H,Diff (se) | tau_H,Cov (se)) using bootstrap
// standard errors when available. Throws kInvalidArgument when empty.
std::string RenderReport(std::span<const EstimateReport> reports,
                         ReportFormat format);

// "0.240 (0.129)"; "n/a" when the value is not finite.
std::string FormatEstimateCell(double value, double se);

}  // namespace rprct::io

#endif  // RPRCT_DATAIO_HPP_
