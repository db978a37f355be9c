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

#include "rprct/dataio.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "rprct/status.hpp"

namespace rprct::io {

namespace {

constexpr std::uint8_t kMissingOutcome = 255;
const std::set<std::string> kSidecarColumns = {"y1", "y0", "c", "behavior", "p"};

[[noreturn]] void SchemaError(const std::string& where, const std::string& what) {
  Fail(ErrorCode::kSchema, where.empty() ? what : where + ": " + what);
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool ParseNumber(const std::string& text, double* out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    return false;
  }
  *out = v;
  return true;
}

std::string Location(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

std::uint8_t ParseFlag(const std::string& v, const char* allowed0,
                       const char* allowed1, std::uint8_t value0,
                       std::uint8_t value1, std::size_t row,
                       const std::string& column) {
  if (v == allowed0) return value0;
  if (v == allowed1) return value1;
  SchemaError(Location(row, column), "expected " + std::string(allowed0) +
                                         " or " + allowed1 + ", got '" + v + "'");
}

std::vector<std::string> SortedLevels(const std::set<std::string>& seen) {
  std::vector<std::string> levels(seen.begin(), seen.end());
  const bool numeric = std::all_of(levels.begin(), levels.end(), [](const auto& l) {
    double v;
    return ParseNumber(l, &v);
  });
  if (numeric) {
    std::stable_sort(levels.begin(), levels.end(), [](const auto& x, const auto& y) {
      return std::strtod(x.c_str(), nullptr) < std::strtod(y.c_str(), nullptr);
    });
  }
  return levels;
}

CovariateKind InferKind(const std::vector<std::string>& cells,
                        const std::string& missing) {
  bool binary = true, numeric = true;
  for (const auto& c : cells) {
    if (c == missing || c.empty()) continue;
    double v;
    if (!ParseNumber(c, &v)) numeric = false;
    if (c != "0" && c != "1") binary = false;
  }
  if (binary) return CovariateKind::kBinary;
  return numeric ? CovariateKind::kNumeric : CovariateKind::kCategorical;
}

// ---- JSON helpers ----------------------------------------------------------

std::string Child(const std::string& pointer, const std::string& key) {
  return pointer + "/" + key;
}

void CheckObject(const Json& j, const std::string& pointer) {
  if (!j.is_object()) SchemaError(pointer.empty() ? "/" : pointer, "expected an object");
}

void CheckKeys(const Json& j, const std::string& pointer,
               std::initializer_list<const char*> allowed) {
  CheckObject(j, pointer);
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) SchemaError(Child(pointer, item.key()), "unknown key");
  }
}

const Json& Required(const Json& j, const std::string& key,
                     const std::string& pointer) {
  CheckObject(j, pointer);
  auto it = j.find(key);
  if (it == j.end()) SchemaError(Child(pointer, key), "required key is missing");
  return *it;
}

double AsNumber(const Json& j, const std::string& pointer) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string() && j.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) SchemaError(pointer, "expected a number");
  return j.get<double>();
}

double Number(const Json& j, const std::string& key, const std::string& pointer) {
  const Json& v = Required(j, key, pointer);
  if (!v.is_number()) SchemaError(Child(pointer, key), "expected a number");
  return v.get<double>();
}

double NumberOr(const Json& j, const std::string& key, const std::string& pointer,
                double fallback) {
  return j.contains(key) ? Number(j, key, pointer) : fallback;
}

std::uint64_t Unsigned(const Json& j, const std::string& key,
                       const std::string& pointer) {
  const Json& v = Required(j, key, pointer);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    SchemaError(Child(pointer, key), "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool Bool(const Json& j, const std::string& key, const std::string& pointer) {
  const Json& v = Required(j, key, pointer);
  if (!v.is_boolean()) SchemaError(Child(pointer, key), "expected true or false");
  return v.get<bool>();
}

std::string String(const Json& j, const std::string& key, const std::string& pointer) {
  const Json& v = Required(j, key, pointer);
  if (!v.is_string()) SchemaError(Child(pointer, key), "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> Strings(const Json& j, const std::string& pointer) {
  if (!j.is_array()) SchemaError(pointer, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) SchemaError(Child(pointer, std::to_string(i)), "expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

std::vector<double> Numbers(const Json& j, const std::string& pointer) {
  if (!j.is_array()) SchemaError(pointer, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(AsNumber(j[i], Child(pointer, std::to_string(i))));
  }
  return out;
}

// Rethrows library errors raised while interpreting a JSON subtree with the
// subtree's pointer attached.
template <typename F>
auto AtPointer(const std::string& pointer, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema) throw;
    Fail(e.code(), (pointer.empty() ? "/" : pointer) + ": " + e.what());
  }
}

Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> OptionalNumberFrom(const Json& j, const std::string& key,
                                         const std::string& pointer) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return AsNumber(*it, Child(pointer, key));
}

Json ToJson(const WaldResult& w) {
  return Json{{"statistic", w.statistic}, {"p_value", w.p_value}, {"reject", w.reject}};
}

WaldResult WaldFromJson(const Json& j, const std::string& pointer) {
  return {AsNumber(Required(j, "statistic", pointer), Child(pointer, "statistic")),
          AsNumber(Required(j, "p_value", pointer), Child(pointer, "p_value")),
          Bool(j, "reject", pointer)};
}

Json ToJson(const BootstrapResult& b) {
  return Json{{"se", b.se},
              {"ci_low", b.ci_low},
              {"ci_high", b.ci_high},
              {"replicates", b.replicates},
              {"skipped", b.skipped}};
}

BootstrapResult BootstrapFromJson(const Json& j, const std::string& pointer) {
  BootstrapResult b;
  b.se = Number(j, "se", pointer);
  b.ci_low = Number(j, "ci_low", pointer);
  b.ci_high = Number(j, "ci_high", pointer);
  b.replicates = Unsigned(j, "replicates", pointer);
  b.skipped = Unsigned(j, "skipped", pointer);
  return b;
}

Json ToJson(const glm::ModelSummary& m) {
  Json path = Json::array();
  for (const auto& step : m.aic_path) {
    path.push_back(Json{{"action", step.action}, {"aic", step.aic}});
  }
  return Json{{"terms", m.terms},
              {"coefficient_names", m.coefficient_names},
              {"coefficients", m.coefficients},
              {"converged", m.converged},
              {"log_likelihood", m.log_likelihood},
              {"aic", m.aic},
              {"aic_path", path}};
}

glm::ModelSummary ModelFromJson(const Json& j, const std::string& pointer) {
  glm::ModelSummary m;
  m.terms = Strings(Required(j, "terms", pointer), Child(pointer, "terms"));
  m.coefficient_names = Strings(Required(j, "coefficient_names", pointer),
                                Child(pointer, "coefficient_names"));
  m.coefficients = Numbers(Required(j, "coefficients", pointer),
                           Child(pointer, "coefficients"));
  m.converged = Bool(j, "converged", pointer);
  m.log_likelihood = Number(j, "log_likelihood", pointer);
  m.aic = Number(j, "aic", pointer);
  const Json& path = Required(j, "aic_path", pointer);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::string p = Child(Child(pointer, "aic_path"), std::to_string(i));
    m.aic_path.push_back({String(path[i], "action", p), Number(path[i], "aic", p)});
  }
  return m;
}

Json ToJson(const BalanceRow& row) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"covariate", row.covariate},
              {"mean_treated", num(row.mean_treated)},
              {"mean_control", num(row.mean_control)},
              {"smd", OptionalNumber(row.smd)},
              {"missing_treated", row.missing_treated},
              {"missing_control", row.missing_control},
              {"flagged", row.flagged}};
}

BalanceRow BalanceFromJson(const Json& j, const std::string& pointer) {
  BalanceRow row;
  row.covariate = String(j, "covariate", pointer);
  row.mean_treated = AsNumber(Required(j, "mean_treated", pointer), pointer);
  row.mean_control = AsNumber(Required(j, "mean_control", pointer), pointer);
  row.smd = OptionalNumberFrom(j, "smd", pointer);
  row.missing_treated = Number(j, "missing_treated", pointer);
  row.missing_control = Number(j, "missing_control", pointer);
  row.flagged = Bool(j, "flagged", pointer);
  return row;
}

GeneratorKind ParseGeneratorKind(const std::string& name, const std::string& pointer) {
  if (name == "bernoulli") return GeneratorKind::kBernoulli;
  if (name == "categorical") return GeneratorKind::kCategorical;
  if (name == "uniform") return GeneratorKind::kUniform;
  if (name == "gaussian") return GeneratorKind::kGaussian;
  SchemaError(pointer, "unknown generator kind '" + name +
                           "' (expected bernoulli, categorical, uniform or gaussian)");
}

std::string GeneratorKindName(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kBernoulli:
      return "bernoulli";
    case GeneratorKind::kCategorical:
      return "categorical";
    case GeneratorKind::kUniform:
      return "uniform";
    case GeneratorKind::kGaussian:
      return "gaussian";
  }
  return "gaussian";
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> ParseCsv(const std::string& input) {
  std::string_view text(input);
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_quoted = false, any = false;
  std::size_t line = 1;

  auto end_record = [&]() {
    record.push_back(std::move(field));
    field.clear();
    // Blank lines carry no record.
    if (!(record.size() == 1 && record[0].empty() && !field_quoted)) {
      records.push_back(std::move(record));
    }
    record.clear();
    field_quoted = false;
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty()) {
          SchemaError("line " + std::to_string(line), "quote inside an unquoted field");
        }
        in_quotes = true;
        field_quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(ch);
        any = true;
    }
  }
  if (in_quotes) SchemaError("line " + std::to_string(line), "unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string CsvField(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

DatasetSchema DatasetSchema::FromJson(const Json& j) {
  const std::string root;
  CheckKeys(j, root,
            {"id_column", "outcome_columns", "covariates", "missing_token",
             "infer_covariates"});
  DatasetSchema schema;
  if (j.contains("id_column") && !j["id_column"].is_null()) {
    schema.id_column = String(j, "id_column", root);
  }
  if (j.contains("outcome_columns")) {
    schema.outcome_columns = Strings(j["outcome_columns"], "/outcome_columns");
    if (schema.outcome_columns.empty()) {
      SchemaError("/outcome_columns", "at least one outcome column is required");
    }
  }
  if (j.contains("covariates")) {
    const Json& covs = j["covariates"];
    if (!covs.is_array()) SchemaError("/covariates", "expected an array");
    for (std::size_t i = 0; i < covs.size(); ++i) {
      const std::string p = "/covariates/" + std::to_string(i);
      CheckKeys(covs[i], p, {"name", "kind", "levels"});
      ColumnSpec spec;
      spec.name = String(covs[i], "name", p);
      const std::string kind = String(covs[i], "kind", p);
      spec.kind = AtPointer(p + "/kind", [&] { return ParseCovariateKind(kind); });
      if (covs[i].contains("levels")) {
        spec.levels = Strings(covs[i]["levels"], p + "/levels");
      }
      schema.covariates.push_back(std::move(spec));
    }
  }
  if (j.contains("missing_token")) {
    schema.missing_token = String(j, "missing_token", root);
  }
  if (j.contains("infer_covariates")) {
    schema.infer_covariates = Bool(j, "infer_covariates", root);
  }
  return schema;
}

Json DatasetSchema::ToJson() const {
  Json covs = Json::array();
  for (const auto& c : covariates) {
    Json entry{{"name", c.name}, {"kind", CovariateKindName(c.kind)}};
    if (!c.levels.empty()) entry["levels"] = c.levels;
    covs.push_back(std::move(entry));
  }
  return Json{{"id_column", id_column ? Json(*id_column) : Json(nullptr)},
              {"outcome_columns", outcome_columns},
              {"covariates", covs},
              {"missing_token", missing_token},
              {"infer_covariates", infer_covariates}};
}

StudyTable ReadStudyCsv(const std::string& text, const DatasetSchema& schema,
                        ReadSummary* summary) {
  const auto records = ParseCsv(text);
  if (records.empty()) SchemaError("", "file is empty (no header row)");
  std::vector<std::string> header;
  for (const auto& h : records.front()) header.push_back(Trim(h));

  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!index.emplace(header[c], c).second) {
      SchemaError("header", "duplicate column '" + header[c] + "'");
    }
  }
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = index.find(name);
    if (it == index.end()) SchemaError("header", "required column '" + name + "' is missing");
    return it->second;
  };

  const std::size_t s_col = column("s");
  const std::size_t a_col = column("a");
  std::vector<std::size_t> outcome_cols;
  for (const auto& o : schema.outcome_columns) outcome_cols.push_back(column(o));
  std::optional<std::string> id_name = schema.id_column;
  if (!id_name && schema.infer_covariates && index.count("id")) id_name = "id";
  std::optional<std::size_t> id_col;
  if (id_name) id_col = column(*id_name);

  std::vector<ColumnSpec> cov_specs;
  std::vector<std::size_t> cov_cols;
  std::set<std::string> used{"s", "a"};
  used.insert(schema.outcome_columns.begin(), schema.outcome_columns.end());
  if (id_name) used.insert(*id_name);
  for (const auto& spec : schema.covariates) {
    if (used.count(spec.name)) {
      SchemaError("header", "column '" + spec.name + "' is declared twice");
    }
    cov_cols.push_back(column(spec.name));
    cov_specs.push_back(spec);
    used.insert(spec.name);
  }

  const std::size_t rows = records.size() - 1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (used.count(header[c])) continue;
    if (kSidecarColumns.count(header[c])) {
      SchemaError("header", "column '" + header[c] +
                                "' belongs to a truth sidecar and is never read "
                                "as observed data");
    }
    if (!schema.infer_covariates) {
      SchemaError("header", "undeclared column '" + header[c] + "'");
    }
    std::vector<std::string> cells;
    for (std::size_t r = 1; r <= rows; ++r) {
      if (c < records[r].size()) cells.push_back(Trim(records[r][c]));
    }
    cov_specs.push_back({header[c], InferKind(cells, schema.missing_token), {}});
    cov_cols.push_back(c);
  }

  StudyTable table;
  table.outcome_names = schema.outcome_columns;
  table.outcomes.assign(outcome_cols.size(), {});
  table.a.reserve(rows);
  table.s.reserve(rows);
  std::vector<std::size_t> outcome_missing(outcome_cols.size(), 0);

  for (std::size_t r = 1; r <= rows; ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      SchemaError("row " + std::to_string(r),
                  "has " + std::to_string(rec.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    table.s.push_back(ParseFlag(Trim(rec[s_col]), "1", "2", 1, 2, r, "s"));
    table.a.push_back(ParseFlag(Trim(rec[a_col]), "0", "1", 0, 1, r, "a"));
    for (std::size_t k = 0; k < outcome_cols.size(); ++k) {
      const std::string v = Trim(rec[outcome_cols[k]]);
      if (v == schema.missing_token || v.empty()) {
        table.outcomes[k].push_back(kMissingOutcome);
        ++outcome_missing[k];
      } else {
        table.outcomes[k].push_back(
            ParseFlag(v, "0", "1", 0, 1, r, schema.outcome_columns[k]));
      }
    }
    if (id_col) table.ids.push_back(rec[*id_col]);
  }

  std::vector<std::pair<std::string, std::size_t>> missing;
  for (std::size_t k = 0; k < outcome_cols.size(); ++k) {
    missing.emplace_back(schema.outcome_columns[k], outcome_missing[k]);
  }
  for (std::size_t j = 0; j < cov_specs.size(); ++j) {
    const ColumnSpec& spec = cov_specs[j];
    Covariate cov;
    cov.name = spec.name;
    cov.kind = spec.kind;
    cov.values.resize(rows);
    std::vector<std::string> cells(rows);
    std::set<std::string> seen;
    std::size_t miss = 0;
    for (std::size_t r = 1; r <= rows; ++r) {
      cells[r - 1] = Trim(records[r][cov_cols[j]]);
      const bool is_missing = cells[r - 1].empty() || cells[r - 1] == schema.missing_token;
      if (is_missing) {
        ++miss;
        cells[r - 1].clear();
      } else if (spec.kind == CovariateKind::kCategorical) {
        seen.insert(cells[r - 1]);
      }
    }
    if (spec.kind == CovariateKind::kCategorical) {
      cov.levels = spec.levels.empty() ? SortedLevels(seen) : spec.levels;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string& v = cells[r];
      if (v.empty()) {
        cov.values[r] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      switch (spec.kind) {
        case CovariateKind::kBinary:
          cov.values[r] = ParseFlag(v, "0", "1", 0, 1, r + 1, spec.name);
          break;
        case CovariateKind::kNumeric:
          if (!ParseNumber(v, &cov.values[r])) {
            SchemaError(Location(r + 1, spec.name), "expected a number, got '" + v + "'");
          }
          break;
        case CovariateKind::kCategorical: {
          auto it = std::find(cov.levels.begin(), cov.levels.end(), v);
          if (it == cov.levels.end()) {
            SchemaError(Location(r + 1, spec.name), "undeclared level '" + v + "'");
          }
          cov.values[r] = static_cast<double>(it - cov.levels.begin());
          break;
        }
      }
    }
    missing.emplace_back(spec.name, miss);
    table.covariates.push_back(std::move(cov));
  }
  if (summary) {
    summary->rows = rows;
    summary->missing = std::move(missing);
  }
  return table;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) Fail(ErrorCode::kIo, "error while reading '" + path.string() + "'");
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << contents;
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "error while writing '" + path.string() + "'");
}

StudyTable ReadStudy(const std::filesystem::path& path,
                     const DatasetSchema& schema, ReadSummary* summary) {
  const std::string text = ReadFile(path);
  try {
    return ReadStudyCsv(text, schema, summary);
  } catch (const Error& e) {
    Fail(e.code(), path.string() + ": " + e.what());
  }
}

PrivateDataset ReadDataset(const std::filesystem::path& path,
                           const DatasetSchema& schema, ReadSummary* summary) {
  if (schema.outcome_columns.size() != 1) {
    SchemaError("", "a single-outcome dataset needs exactly one outcome column");
  }
  StudyTable table = ReadStudy(path, schema, summary);
  const auto& y = table.outcomes.front();
  if (std::find(y.begin(), y.end(), kMissingOutcome) != y.end()) {
    SchemaError(path.string(), "outcome column has missing values");
  }
  return PrivateDataset(table.outcomes.front(), table.a, table.s,
                        std::move(table.covariates), std::move(table.ids));
}

std::string FormatDatasetCsv(const PrivateDataset& data,
                             const std::string& missing_token) {
  std::ostringstream out;
  const bool ids = !data.ids().empty();
  if (ids) out << "id,";
  out << "s,a,y_tilde";
  for (const auto& c : data.covariates()) out << ',' << CsvField(c.name);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (ids) out << CsvField(data.ids()[i]) << ',';
    out << int(data.s()[i]) << ',' << int(data.a()[i]) << ','
        << int(data.y_tilde()[i]);
    for (const auto& c : data.covariates()) {
      out << ',';
      const double v = c.values[i];
      if (Covariate::IsMissing(v)) {
        out << CsvField(missing_token);
      } else if (c.kind == CovariateKind::kCategorical) {
        out << CsvField(c.levels[static_cast<std::size_t>(v)]);
      } else if (c.kind == CovariateKind::kBinary) {
        out << (v != 0.0 ? '1' : '0');
      } else {
        out << FormatDouble(v);
      }
    }
    out << '\n';
  }
  return out.str();
}

void WriteDataset(const PrivateDataset& data, const std::filesystem::path& path,
                  const std::string& missing_token) {
  WriteFile(path, FormatDatasetCsv(data, missing_token));
}

std::string FormatSidecarCsv(const TruthSidecar& truth) {
  std::ostringstream out;
  out << "id,s,a,y1,y0,c,behavior,p\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << CsvField(truth.ids.empty() ? std::to_string(i + 1) : truth.ids[i]) << ','
        << int(truth.s[i]) << ',' << int(truth.a[i]) << ',' << int(truth.y1[i])
        << ',' << int(truth.y0[i]) << ',' << int(truth.cheater[i]) << ','
        << BehaviorName(truth.behavior[i]) << ',' << PromptName(truth.prompt[i])
        << '\n';
  }
  return out.str();
}

void WriteSidecar(const TruthSidecar& truth, const std::filesystem::path& path) {
  WriteFile(path, FormatSidecarCsv(truth));
}

TruthSidecar ReadSidecar(const std::filesystem::path& path) {
  const auto records = ParseCsv(ReadFile(path));
  const std::vector<std::string> expected{"id", "s", "a", "y1", "y0", "c", "behavior", "p"};
  if (records.empty() || records.front() != expected) {
    SchemaError(path.string(), "not a truth sidecar (expected header " 
                "id,s,a,y1,y0,c,behavior,p)");
  }
  TruthSidecar t;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != expected.size()) {
      SchemaError("row " + std::to_string(r), "wrong number of fields");
    }
    t.ids.push_back(rec[0]);
    t.s.push_back(ParseFlag(rec[1], "1", "2", 1, 2, r, "s"));
    t.a.push_back(ParseFlag(rec[2], "0", "1", 0, 1, r, "a"));
    t.y1.push_back(ParseFlag(rec[3], "0", "1", 0, 1, r, "y1"));
    t.y0.push_back(ParseFlag(rec[4], "0", "1", 0, 1, r, "y0"));
    t.cheater.push_back(ParseFlag(rec[5], "0", "1", 0, 1, r, "c"));
    t.behavior.push_back(
        AtPointer(Location(r, "behavior"), [&] { return ParseBehavior(rec[6]); }));
    Prompt p;
    if (rec[7] == PromptName(Prompt::kForce0)) {
      p = Prompt::kForce0;
    } else if (rec[7] == PromptName(Prompt::kForce1)) {
      p = Prompt::kForce1;
    } else if (rec[7] == PromptName(Prompt::kReportTruth)) {
      p = Prompt::kReportTruth;
    } else {
      SchemaError(Location(r, "p"), "unknown prompt '" + rec[7] + "'");
    }
    t.prompt.push_back(p);
  }
  return t;
}

DatasetSchema SchemaFor(const PrivateDataset& data) {
  DatasetSchema schema;
  if (!data.ids().empty()) schema.id_column = "id";
  for (const auto& c : data.covariates()) {
    schema.covariates.push_back({c.name, c.kind, c.levels});
  }
  return schema;
}

// ---------------------------------------------------------------------------
// JSON

Json ToJson(const FrrParams& params) {
  return Json{{"r0", params.r0()}, {"r1", params.r1()}};
}

FrrParams FrrFromJson(const Json& j, const std::string& pointer) {
  CheckKeys(j, pointer, {"r0", "r1"});
  const double r0 = Number(j, "r0", pointer);
  const double r1 = Number(j, "r1", pointer);
  return AtPointer(pointer, [&] { return FrrParams(r0, r1); });
}

Json EpsilonToJson(const PrivacyLoss& loss) {
  return loss.finite() ? Json(loss.epsilon) : Json("inf");
}

DesignSpec DesignFromJson(const Json& j, const std::string& pointer) {
  CheckKeys(j, pointer, {"delta", "frr1", "frr2", "epsilon", "gap"});
  const double delta = Number(j, "delta", pointer);
  if (j.contains("frr1") || j.contains("frr2")) {
    if (j.contains("gap")) {
      SchemaError(Child(pointer, "gap"), "give either frr1/frr2 or epsilon/gap");
    }
    const FrrParams f1 = FrrFromJson(Required(j, "frr1", pointer), Child(pointer, "frr1"));
    const FrrParams f2 = FrrFromJson(Required(j, "frr2", pointer), Child(pointer, "frr2"));
    return AtPointer(pointer, [&] { return DesignSpec(delta, f1, f2); });
  }
  const double epsilon = Number(j, "epsilon", pointer);
  const double gap = Number(j, "gap", pointer);
  return AtPointer(pointer, [&] {
    const auto [r, r_prime] = SolveFrrForEpsilon(epsilon, gap);
    return DesignSpec(delta, FrrParams::Symmetric(r), FrrParams::Symmetric(r_prime));
  });
}

Json ToJson(const DesignSpec& spec) {
  return Json{{"delta", spec.delta()},
              {"frr1", ToJson(spec.frr1())},
              {"frr2", ToJson(spec.frr2())},
              {"epsilon", EpsilonToJson(spec.epsilon())}};
}

Json ToJson(const EfficiencyQuote& quote) {
  return Json{{"relative_efficiency", quote.relative_efficiency},
              {"se_inflation", quote.se_inflation},
              {"sample_size_multiplier", quote.sample_size_multiplier}};
}

Json ToJson(const DesignReport& report) {
  return Json{
      {"design", ToJson(report.spec)},
      {"epsilon",
       Json{{"strict", EpsilonToJson(report.epsilon.strict)},
            {"symmetric_formula", EpsilonToJson(report.epsilon.symmetric_formula)},
            {"one_sided", EpsilonToJson(report.epsilon.one_sided)}}},
      {"tau0", report.tau0},
      {"tau1", report.tau1},
      {"efficiency", ToJson(report.efficiency)},
      {"masking_factor", report.masking_factor},
      {"identification_gap", report.identification_gap},
      {"warnings", report.warnings}};
}

PopulationConfig PopulationFromJson(const Json& j, const std::string& pointer) {
  CheckKeys(j, pointer,
            {"n", "lambda", "covariates", "outcome", "behavior_mix",
             "cheater_independent", "cheater_tilt"});
  PopulationConfig config;
  config.n = Unsigned(j, "n", pointer);
  config.lambda = NumberOr(j, "lambda", pointer, 0.0);
  if (j.contains("covariates")) {
    const std::string cp = Child(pointer, "covariates");
    const Json& covs = j["covariates"];
    if (!covs.is_array()) SchemaError(cp, "expected an array");
    for (std::size_t i = 0; i < covs.size(); ++i) {
      const std::string p = Child(cp, std::to_string(i));
      CheckKeys(covs[i], p,
                {"name", "kind", "p", "probabilities", "min", "max", "mean", "sd",
                 "missing_rate"});
      CovariateGenerator g;
      g.name = String(covs[i], "name", p);
      g.kind = ParseGeneratorKind(String(covs[i], "kind", p), Child(p, "kind"));
      g.p = NumberOr(covs[i], "p", p, g.p);
      if (covs[i].contains("probabilities")) {
        g.probabilities = Numbers(covs[i]["probabilities"], Child(p, "probabilities"));
      }
      g.min = NumberOr(covs[i], "min", p, g.min);
      g.max = NumberOr(covs[i], "max", p, g.max);
      g.mean = NumberOr(covs[i], "mean", p, g.mean);
      g.sd = NumberOr(covs[i], "sd", p, g.sd);
      g.missing_rate = NumberOr(covs[i], "missing_rate", p, 0.0);
      config.covariates.push_back(std::move(g));
    }
  }
  if (j.contains("outcome")) {
    const std::string op = Child(pointer, "outcome");
    const Json& o = j["outcome"];
    CheckKeys(o, op, {"intercept", "treatment_shift", "coefficients"});
    config.outcome.intercept = NumberOr(o, "intercept", op, 0.0);
    config.outcome.treatment_shift = NumberOr(o, "treatment_shift", op, 0.0);
    if (o.contains("coefficients")) {
      const std::string bp = Child(op, "coefficients");
      const Json& betas = o["coefficients"];
      if (!betas.is_array()) SchemaError(bp, "expected an array");
      for (std::size_t i = 0; i < betas.size(); ++i) {
        const std::string p = Child(bp, std::to_string(i));
        if (betas[i].is_number()) {
          config.outcome.coefficients.push_back({betas[i].get<double>()});
        } else {
          config.outcome.coefficients.push_back(Numbers(betas[i], p));
        }
      }
    }
  }
  if (j.contains("behavior_mix")) {
    const std::string mp = Child(pointer, "behavior_mix");
    const Json& mix = j["behavior_mix"];
    CheckObject(mix, mp);
    config.behavior_mix.fill(0.0);
    for (const auto& item : mix.items()) {
      const std::string p = Child(mp, item.key());
      const CheaterBehavior b = AtPointer(p, [&] { return ParseBehavior(item.key()); });
      config.behavior_mix[static_cast<std::size_t>(b)] = AsNumber(item.value(), p);
    }
  }
  if (j.contains("cheater_independent")) {
    config.cheater_independent = Bool(j, "cheater_independent", pointer);
  }
  config.cheater_tilt = NumberOr(j, "cheater_tilt", pointer, 0.0);
  AtPointer(pointer.empty() ? "/" : pointer, [&] {
    config.Validate();
    return 0;
  });
  return config;
}

Json ToJson(const PopulationConfig& config) {
  Json covs = Json::array();
  for (const auto& g : config.covariates) {
    Json entry{{"name", g.name}, {"kind", GeneratorKindName(g.kind)}};
    switch (g.kind) {
      case GeneratorKind::kBernoulli:
        entry["p"] = g.p;
        break;
      case GeneratorKind::kCategorical:
        entry["probabilities"] = g.probabilities;
        break;
      case GeneratorKind::kUniform:
        entry["min"] = g.min;
        entry["max"] = g.max;
        break;
      case GeneratorKind::kGaussian:
        entry["mean"] = g.mean;
        entry["sd"] = g.sd;
        break;
    }
    entry["missing_rate"] = g.missing_rate;
    covs.push_back(std::move(entry));
  }
  Json mix = Json::object();
  for (std::size_t k = 0; k < kBehaviorCount; ++k) {
    if (config.behavior_mix[k] != 0.0) {
      mix[BehaviorName(static_cast<CheaterBehavior>(k))] = config.behavior_mix[k];
    }
  }
  return Json{{"n", config.n},
              {"lambda", config.lambda},
              {"covariates", covs},
              {"outcome",
               Json{{"intercept", config.outcome.intercept},
                    {"treatment_shift", config.outcome.treatment_shift},
                    {"coefficients", config.outcome.coefficients}}},
              {"behavior_mix", mix},
              {"cheater_independent", config.cheater_independent},
              {"cheater_tilt", config.cheater_tilt}};
}

SimulationConfig SimulationFromJson(const Json& j) {
  CheckKeys(j, "", {"population", "design"});
  PopulationConfig population =
      PopulationFromJson(Required(j, "population", ""), "/population");
  DesignSpec design = DesignFromJson(Required(j, "design", ""), "/design");
  return {std::move(population), std::move(design)};
}

Json ToJson(const MonteCarloSummary& summary) {
  Json methods = Json::array();
  for (const auto& m : summary.methods) {
    Json entry{{"method", MethodName(m.method)},
               {"replicates", m.replicates},
               {"failures", m.failures},
               {"mean", m.mean},
               {"truth_mean", m.truth_mean},
               {"bias", m.bias},
               {"variance", m.variance},
               {"coverage", m.coverage},
               {"coverage_bootstrap", OptionalNumber(m.coverage_bootstrap)},
               {"mean_se_analytic", m.mean_se_analytic},
               {"mean_se_bootstrap", OptionalNumber(m.mean_se_bootstrap)},
               {"mean_analytic_variance", m.mean_analytic_variance},
               {"rejection_rate", m.rejection_rate}};
    if (!m.values.empty()) entry["values"] = m.values;
    if (!m.p_values.empty()) entry["p_values"] = m.p_values;
    methods.push_back(std::move(entry));
  }
  return Json{{"replicates", summary.replicates},
              {"seed", summary.seed},
              {"true_tau_h_mean", summary.true_tau_h_mean},
              {"lambda",
               Json{{"truth_mean", summary.lambda.truth_mean},
                    {"mean", summary.lambda.mean},
                    {"raw_mean", summary.lambda.raw_mean},
                    {"variance", summary.lambda.variance},
                    {"corrected_fraction", summary.lambda.corrected_fraction}}},
              {"methods", methods}};
}

Json ToJson(const CheaterEstimate& e) {
  return Json{{"lambda_hat", e.lambda_hat},
              {"se", e.se},
              {"scaled_variance", e.scaled_variance},
              {"raw_value", e.raw_value},
              {"boundary_corrected", e.boundary_corrected}};
}

namespace {

CheaterEstimate CheaterFromJson(const Json& j, const std::string& pointer) {
  CheaterEstimate e;
  e.lambda_hat = Number(j, "lambda_hat", pointer);
  e.se = Number(j, "se", pointer);
  e.scaled_variance = Number(j, "scaled_variance", pointer);
  e.raw_value = Number(j, "raw_value", pointer);
  e.boundary_corrected = Bool(j, "boundary_corrected", pointer);
  return e;
}

EffectEstimate EffectFromJson(const Json& j, const std::string& pointer) {
  EffectEstimate e;
  e.method = AtPointer(Child(pointer, "method"),
                       [&] { return ParseMethod(String(j, "method", pointer)); });
  e.tau_hat = Number(j, "tau_hat", pointer);
  e.se_analytic = Number(j, "se_analytic", pointer);
  e.se_bootstrap = OptionalNumberFrom(j, "se_bootstrap", pointer);
  e.ci_low = Number(j, "ci_low", pointer);
  e.ci_high = Number(j, "ci_high", pointer);
  e.alpha = Number(j, "alpha", pointer);
  e.n = Unsigned(j, "n", pointer);
  if (j.contains("lambda") && !j["lambda"].is_null()) {
    e.lambda = CheaterFromJson(j["lambda"], Child(pointer, "lambda"));
  }
  e.warnings = Strings(Required(j, "warnings", pointer), Child(pointer, "warnings"));
  return e;
}

}  // namespace

CheaterEstimate CheaterEstimateFromJson(const Json& json) {
  return CheaterFromJson(json, "");
}

Json ToJson(const EffectEstimate& e) {
  return Json{{"method", MethodName(e.method)},
              {"tau_hat", e.tau_hat},
              {"se_analytic", e.se_analytic},
              {"se_bootstrap", OptionalNumber(e.se_bootstrap)},
              {"ci_low", e.ci_low},
              {"ci_high", e.ci_high},
              {"alpha", e.alpha},
              {"n", e.n},
              {"lambda", e.lambda ? ToJson(*e.lambda) : Json(nullptr)},
              {"warnings", e.warnings}};
}

EffectEstimate EffectEstimateFromJson(const Json& json) {
  return EffectFromJson(json, "");
}

Json ToJson(const EstimateReport& r) {
  Json balance = Json::array();
  for (const auto& row : r.balance) balance.push_back(ToJson(row));
  auto opt = [](const auto& v) { return v ? ToJson(*v) : Json(nullptr); };
  return Json{{"outcome", r.outcome},
              {"n", r.n},
              {"alpha", r.alpha},
              {"bootstrap_resamples", r.bootstrap_resamples},
              {"working_models", r.working_models},
              {"lambda", ToJson(r.lambda)},
              {"lambda_se_bootstrap", OptionalNumber(r.lambda_se_bootstrap)},
              {"h_diff", ToJson(r.hdiff)},
              {"h_diff_wald", ToJson(r.hdiff_wald)},
              {"h_diff_bootstrap", opt(r.hdiff_bootstrap)},
              {"h_cov", opt(r.hcov)},
              {"h_cov_wald", opt(r.hcov_wald)},
              {"h_cov_bootstrap", opt(r.hcov_bootstrap)},
              {"model_treated", opt(r.model_treated)},
              {"model_control", opt(r.model_control)},
              {"balance", balance},
              {"warnings", r.warnings}};
}

EstimateReport EstimateReportFromJson(const Json& j) {
  const std::string p;
  CheckObject(j, p);
  auto has = [&](const char* key) { return j.contains(key) && !j[key].is_null(); };
  EstimateReport r;
  r.outcome = String(j, "outcome", p);
  r.n = Unsigned(j, "n", p);
  r.alpha = Number(j, "alpha", p);
  r.bootstrap_resamples = Unsigned(j, "bootstrap_resamples", p);
  r.working_models = String(j, "working_models", p);
  r.lambda = CheaterFromJson(Required(j, "lambda", p), "/lambda");
  r.lambda_se_bootstrap = OptionalNumberFrom(j, "lambda_se_bootstrap", p);
  r.hdiff = EffectFromJson(Required(j, "h_diff", p), "/h_diff");
  r.hdiff_wald = WaldFromJson(Required(j, "h_diff_wald", p), "/h_diff_wald");
  if (has("h_diff_bootstrap")) {
    r.hdiff_bootstrap = BootstrapFromJson(j["h_diff_bootstrap"], "/h_diff_bootstrap");
  }
  if (has("h_cov")) r.hcov = EffectFromJson(j["h_cov"], "/h_cov");
  if (has("h_cov_wald")) r.hcov_wald = WaldFromJson(j["h_cov_wald"], "/h_cov_wald");
  if (has("h_cov_bootstrap")) {
    r.hcov_bootstrap = BootstrapFromJson(j["h_cov_bootstrap"], "/h_cov_bootstrap");
  }
  if (has("model_treated")) r.model_treated = ModelFromJson(j["model_treated"], "/model_treated");
  if (has("model_control")) r.model_control = ModelFromJson(j["model_control"], "/model_control");
  const Json& balance = Required(j, "balance", p);
  for (std::size_t i = 0; i < balance.size(); ++i) {
    r.balance.push_back(BalanceFromJson(balance[i], "/balance/" + std::to_string(i)));
  }
  r.warnings = Strings(Required(j, "warnings", p), "/warnings");
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

ReportFormat ParseReportFormat(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  Fail(ErrorCode::kInvalidArgument,
       "unknown format '" + name + "' (expected json, markdown or csv)");
}

std::string FormatEstimateCell(double value, double se) {
  if (!std::isfinite(value) || !std::isfinite(se)) return "n/a";
  auto fixed3 = [](double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.3f", v);
    std::string s = buffer;
    if (s == "-0.000") s = "0.000";
    return s;
  };
  return fixed3(value) + " (" + fixed3(se) + ")";
}

std::string RenderReport(std::span<const EstimateReport> reports,
                         ReportFormat format) {
  Require(!reports.empty(), ErrorCode::kInvalidArgument, "no reports to render");
  switch (format) {
    case ReportFormat::kJson: {
      Json all = Json::array();
      for (const auto& r : reports) all.push_back(ToJson(r));
      return Json{{"reports", all}}.dump(2) + "\n";
    }
    case ReportFormat::kMarkdown: {
      std::ostringstream out;
      out << "| Outcome | λ̂ (se) | τ̂_H,Diff (se) | "
             "τ̂_H,Cov (se) |\n";
      out << "|---|---|---|---|\n";
      for (const auto& r : reports) {
        const double lambda_se = r.lambda_se_bootstrap.value_or(r.lambda.se);
        const double hdiff_se = r.hdiff.se_bootstrap.value_or(r.hdiff.se_analytic);
        std::string hcov = "n/a";
        if (r.hcov) {
          hcov = FormatEstimateCell(r.hcov->tau_hat,
                                    r.hcov->se_bootstrap.value_or(r.hcov->se_analytic));
        }
        out << "| " << r.outcome << " | "
            << FormatEstimateCell(r.lambda.lambda_hat, lambda_se) << " | "
            << FormatEstimateCell(r.hdiff.tau_hat, hdiff_se) << " | " << hcov
            << " |\n";
      }
      return out.str();
    }
    case ReportFormat::kCsv: {
      std::ostringstream out;
      out << "outcome,n,lambda_hat,lambda_se,lambda_se_bootstrap,lambda_raw,"
             "lambda_boundary_corrected,h_diff,h_diff_se,h_diff_se_bootstrap,"
             "h_diff_ci_low,h_diff_ci_high,h_diff_p_value,h_cov,h_cov_se,"
             "h_cov_se_bootstrap,h_cov_ci_low,h_cov_ci_high,h_cov_p_value\n";
      auto num = [](double v) { return FormatDouble(v); };
      auto opt = [](const std::optional<double>& v) {
        return v ? FormatDouble(*v) : std::string();
      };
      for (const auto& r : reports) {
        out << CsvField(r.outcome) << ',' << r.n << ',' << num(r.lambda.lambda_hat)
            << ',' << num(r.lambda.se) << ',' << opt(r.lambda_se_bootstrap) << ','
            << num(r.lambda.raw_value) << ',' << (r.lambda.boundary_corrected ? 1 : 0)
            << ',' << num(r.hdiff.tau_hat) << ',' << num(r.hdiff.se_analytic) << ','
            << opt(r.hdiff.se_bootstrap) << ',' << num(r.hdiff.ci_low) << ','
            << num(r.hdiff.ci_high) << ',' << num(r.hdiff_wald.p_value);
        if (r.hcov) {
          out << ',' << num(r.hcov->tau_hat) << ',' << num(r.hcov->se_analytic) << ','
              << opt(r.hcov->se_bootstrap) << ',' << num(r.hcov->ci_low) << ','
              << num(r.hcov->ci_high) << ','
              << (r.hcov_wald ? num(r.hcov_wald->p_value) : std::string());
        } else {
          out << ",,,,,,";
        }
        out << '\n';
      }
      return out.str();
    }
  }
  return "";
}

}  // namespace rprct::io
