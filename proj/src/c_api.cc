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

#include "rprct/rprct.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "rprct/dataio.hpp"
#include "rprct/design.hpp"
#include "rprct/estimate.hpp"
#include "rprct/mechanism.hpp"
#include "rprct/simulate.hpp"
#include "rprct/status.hpp"

struct rprct_design {
  rprct::DesignSpec spec;
};

struct rprct_study {
  rprct::StudyTable table;
};

struct rprct_reports {
  std::vector<rprct::EstimateReport> reports;
};

namespace {

using rprct::ErrorCode;
using rprct::Fail;
using rprct::io::Json;

thread_local std::string last_error;

template <typename F>
rprct_status Guard(F&& body) {
  try {
    body();
    return RPRCT_OK;
  } catch (const rprct::Error& e) {
    last_error = e.what();
    return static_cast<rprct_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return RPRCT_E_SCHEMA;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RPRCT_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RPRCT_E_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return RPRCT_E_INTERNAL;
  }
}

void NotNull(const void* p, const char* what) {
  if (p == nullptr) Fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Json ParseJson(const char* text, const char* what) {
  NotNull(text, what);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorCode::kSchema, std::string(what) + " is not valid JSON: " + e.what());
  }
}

Json ParseOptional(const char* text, const char* what) {
  return text == nullptr ? Json::object() : ParseJson(text, what);
}

void CheckOptionKeys(const Json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) Fail(ErrorCode::kSchema, "options must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) Fail(ErrorCode::kSchema, "/" + item.key() + ": unknown option");
  }
}

double OptionNumber(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) Fail(ErrorCode::kSchema, std::string("/") + key + ": expected a number");
  return j[key].get<double>();
}

std::size_t OptionCount(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
    Fail(ErrorCode::kSchema, std::string("/") + key + ": expected a nonnegative integer");
  }
  return j[key].get<std::size_t>();
}

rprct::WorkingModelOptions ModelOptions(const Json& j) {
  rprct::WorkingModelOptions models;
  if (j.contains("working_models")) {
    if (!j["working_models"].is_string()) {
      Fail(ErrorCode::kSchema, "/working_models: expected a string");
    }
    models.kind = rprct::ParseWorkingModelKind(j["working_models"].get<std::string>());
  }
  if (j.contains("missing_indicators")) {
    if (!j["missing_indicators"].is_boolean()) {
      Fail(ErrorCode::kSchema, "/missing_indicators: expected true or false");
    }
    models.missing_indicators = j["missing_indicators"].get<bool>();
  }
  return models;
}

rprct::ReplicateOptions ReplicateOptionsFrom(const char* options_json) {
  const Json j = ParseOptional(options_json, "options");
  CheckOptionKeys(j, {"methods", "bootstrap", "alpha", "known_lambda",
                      "working_models", "missing_indicators", "keep_values"});
  rprct::ReplicateOptions options;
  if (j.contains("methods")) {
    if (!j["methods"].is_array() || j["methods"].empty()) {
      Fail(ErrorCode::kSchema, "/methods: expected a nonempty array of names");
    }
    options.methods.clear();
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) Fail(ErrorCode::kSchema, "/methods: expected strings");
      options.methods.push_back(rprct::ParseMethod(m.get<std::string>()));
    }
  }
  options.bootstrap = OptionCount(j, "bootstrap", 0);
  options.alpha = OptionNumber(j, "alpha", 0.05);
  if (j.contains("known_lambda") && !j["known_lambda"].is_null()) {
    options.known_lambda = OptionNumber(j, "known_lambda", 0.0);
  }
  options.models = ModelOptions(j);
  if (j.contains("keep_values")) options.keep_values = j["keep_values"].get<bool>();
  return options;
}

}  // namespace

extern "C" {

const char* rprct_version(void) { return "0.1.0"; }

const char* rprct_last_error(void) { return last_error.c_str(); }

const char* rprct_status_name(rprct_status status) {
  if (status == RPRCT_OK) return "ok";
  if (status < RPRCT_E_INVALID_ARGUMENT || status > RPRCT_E_INTERNAL) return "unknown";
  return rprct::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

int rprct_status_is_statistical(rprct_status status) {
  if (status < RPRCT_E_INVALID_ARGUMENT || status > RPRCT_E_INTERNAL) return 0;
  return rprct::IsStatisticalFailure(static_cast<ErrorCode>(status)) ? 1 : 0;
}

void rprct_string_free(char* str) { std::free(str); }

rprct_status rprct_epsilon_symmetric(double r, double r_prime, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = rprct::EpsilonSymmetric(r, r_prime).epsilon;
  });
}

rprct_status rprct_epsilon_general(const double* r0, const double* r1,
                                   const double* weights, size_t k, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    if (k == 0) Fail(ErrorCode::kInvalidArgument, "at least one map is required");
    NotNull(r0, "r0");
    NotNull(r1, "r1");
    NotNull(weights, "weights");
    std::vector<rprct::WeightedMap> maps;
    for (size_t i = 0; i < k; ++i) {
      maps.push_back({rprct::FrrParams(r0[i], r1[i]), weights[i]});
    }
    *out = rprct::EpsilonGeneral(maps).epsilon;
  });
}

rprct_status rprct_response_probability(double r0, double r1, int y, double* out) {
  return Guard([&] {
    NotNull(out, "out");
    if (y != 0 && y != 1) Fail(ErrorCode::kInvalidArgument, "y must be 0 or 1");
    *out = rprct::ResponseProbability(rprct::FrrParams(r0, r1), y);
  });
}

rprct_status rprct_design_create(double delta, double frr1_r0, double frr1_r1,
                                 double frr2_r0, double frr2_r1,
                                 rprct_design** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new rprct_design{rprct::DesignSpec(delta, rprct::FrrParams(frr1_r0, frr1_r1),
                                              rprct::FrrParams(frr2_r0, frr2_r1))};
  });
}

rprct_status rprct_design_from_epsilon(double epsilon, double gap, double delta,
                                       rprct_design** out) {
  return Guard([&] {
    NotNull(out, "out");
    const auto [r, r_prime] = rprct::SolveFrrForEpsilon(epsilon, gap);
    *out = new rprct_design{rprct::DesignSpec(delta, rprct::FrrParams::Symmetric(r),
                                              rprct::FrrParams::Symmetric(r_prime))};
  });
}

rprct_status rprct_design_from_json(const char* json, rprct_design** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new rprct_design{rprct::io::DesignFromJson(ParseJson(json, "design"))};
  });
}

void rprct_design_free(rprct_design* design) { delete design; }

rprct_status rprct_design_epsilon(const rprct_design* design, double* out) {
  return Guard([&] {
    NotNull(design, "design");
    NotNull(out, "out");
    *out = design->spec.epsilon().epsilon;
  });
}

rprct_status rprct_design_masking_factor(const rprct_design* design, double* out) {
  return Guard([&] {
    NotNull(design, "design");
    NotNull(out, "out");
    *out = design->spec.masking_factor();
  });
}

rprct_status rprct_design_to_json(const rprct_design* design, char** out_json) {
  return Guard([&] {
    NotNull(design, "design");
    NotNull(out_json, "out_json");
    *out_json = CopyString(rprct::io::ToJson(design->spec).dump(2));
  });
}

rprct_status rprct_design_report(const rprct_design* design, double tau0,
                                 double tau1, char** out_json) {
  return Guard([&] {
    NotNull(design, "design");
    NotNull(out_json, "out_json");
    const auto report = rprct::MakeDesignReport(design->spec, tau0, tau1);
    *out_json = CopyString(rprct::io::ToJson(report).dump(2));
  });
}

rprct_status rprct_solve_frr(double epsilon, double gap, double* r,
                             double* r_prime) {
  return Guard([&] {
    NotNull(r, "r");
    NotNull(r_prime, "r_prime");
    const auto solved = rprct::SolveFrrForEpsilon(epsilon, gap);
    *r = solved.first;
    *r_prime = solved.second;
  });
}

rprct_status rprct_relative_efficiency(double epsilon, double delta, double tau0,
                                       double tau1, double* relative_efficiency,
                                       double* se_inflation,
                                       double* sample_size_multiplier) {
  return Guard([&] {
    const auto q = rprct::RelativeEfficiency(epsilon, delta, tau0, tau1);
    if (relative_efficiency) *relative_efficiency = q.relative_efficiency;
    if (se_inflation) *se_inflation = q.se_inflation;
    if (sample_size_multiplier) *sample_size_multiplier = q.sample_size_multiplier;
  });
}

rprct_status rprct_sample_size(double epsilon, double delta, double tau0,
                               double tau1, double power, double alpha,
                               double effect, uint64_t* n) {
  return Guard([&] {
    NotNull(n, "n");
    *n = rprct::RequiredSampleSize({epsilon, delta, tau0, tau1, power, alpha, effect})
             .n;
  });
}

rprct_status rprct_simulate(const char* config_json, uint64_t seed,
                            const char* out_prefix) {
  return Guard([&] {
    NotNull(out_prefix, "out_prefix");
    const auto config = rprct::io::SimulationFromJson(ParseJson(config_json, "config"));
    const rprct::RandomStream root(seed);
    rprct::RandomStream pop_rng = root.Substream("population");
    rprct::RandomStream protocol_rng = root.Substream("protocol");
    const auto population = rprct::GeneratePopulation(config.population, pop_rng);
    const auto out = rprct::RunProtocol(population, config.design, protocol_rng);
    const std::string prefix(out_prefix);
    rprct::io::WriteDataset(out.data, prefix + ".csv");
    rprct::io::WriteSidecar(out.truth, prefix + ".truth.csv");
    rprct::io::WriteFile(prefix + ".schema.json",
                         rprct::io::SchemaFor(out.data).ToJson().dump(2) + "\n");
  });
}

rprct_status rprct_replicate(const char* config_json, uint64_t seed, size_t reps,
                             const char* options_json, char** out_json) {
  return Guard([&] {
    NotNull(out_json, "out_json");
    const auto config = rprct::io::SimulationFromJson(ParseJson(config_json, "config"));
    const auto options = ReplicateOptionsFrom(options_json);
    const auto summary =
        rprct::Replicate(config.population, config.design, reps, seed, options);
    Json doc{{"design", rprct::io::ToJson(config.design)},
             {"summary", rprct::io::ToJson(summary)}};
    *out_json = CopyString(doc.dump(2));
  });
}

rprct_status rprct_power(const char* config_json, const char* design_json,
                         const char* grid_json, uint64_t seed, size_t reps,
                         const char* options_json, char** out_json) {
  return Guard([&] {
    NotNull(out_json, "out_json");
    auto config = rprct::io::SimulationFromJson(ParseJson(config_json, "config"));
    if (design_json != nullptr) {
      config.design = rprct::io::DesignFromJson(ParseJson(design_json, "design"));
    }
    const Json grid = ParseJson(grid_json, "grid");
    CheckOptionKeys(grid, {"kind", "values", "gap"});
    if (!grid.contains("kind") || !grid["kind"].is_string()) {
      Fail(ErrorCode::kSchema, "/kind: expected \"effect\" or \"epsilon\"");
    }
    const std::string kind_name = grid["kind"].get<std::string>();
    rprct::GridKind kind;
    if (kind_name == "effect") {
      kind = rprct::GridKind::kEffect;
    } else if (kind_name == "epsilon") {
      kind = rprct::GridKind::kEpsilon;
    } else {
      Fail(ErrorCode::kSchema, "/kind: expected \"effect\" or \"epsilon\"");
    }
    if (!grid.contains("values") || !grid["values"].is_array()) {
      Fail(ErrorCode::kSchema, "/values: expected an array of numbers");
    }
    std::vector<double> values;
    for (const auto& v : grid["values"]) {
      if (!v.is_number()) Fail(ErrorCode::kSchema, "/values: expected numbers");
      values.push_back(v.get<double>());
    }
    const double gap = OptionNumber(grid, "gap", 0.0);
    const auto options = ReplicateOptionsFrom(options_json);
    const auto points = rprct::PowerGrid(config.population, config.design, kind,
                                         values, gap, reps, seed, options);
    Json out_points = Json::array();
    for (const auto& p : points) {
      out_points.push_back(Json{{"value", p.value},
                                {"design", rprct::io::ToJson(p.spec)},
                                {"summary", rprct::io::ToJson(p.summary)}});
    }
    Json doc{{"kind", rprct::GridKindName(kind)},
             {"replicates", reps},
             {"seed", seed},
             {"points", out_points}};
    *out_json = CopyString(doc.dump(2));
  });
}

rprct_status rprct_study_read(const char* path, const char* schema_json,
                              rprct_study** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    rprct::io::DatasetSchema schema;
    if (schema_json != nullptr) {
      schema = rprct::io::DatasetSchema::FromJson(ParseJson(schema_json, "schema"));
    }
    *out = new rprct_study{rprct::io::ReadStudy(path, schema)};
  });
}

void rprct_study_free(rprct_study* study) { delete study; }

rprct_status rprct_study_rows(const rprct_study* study, size_t* out) {
  return Guard([&] {
    NotNull(study, "study");
    NotNull(out, "out");
    *out = study->table.size();
  });
}

rprct_status rprct_study_outcome_count(const rprct_study* study, size_t* out) {
  return Guard([&] {
    NotNull(study, "study");
    NotNull(out, "out");
    *out = study->table.outcome_names.size();
  });
}

rprct_status rprct_estimate(const rprct_study* study, const rprct_design* design,
                            const char* options_json, rprct_reports** out) {
  return Guard([&] {
    NotNull(study, "study");
    NotNull(design, "design");
    NotNull(out, "out");
    const Json j = ParseOptional(options_json, "options");
    CheckOptionKeys(j, {"alpha", "bootstrap", "seed", "working_models",
                        "missing_indicators", "outcomes"});
    rprct::EstimateOptions options;
    options.alpha = OptionNumber(j, "alpha", 0.05);
    options.bootstrap = OptionCount(j, "bootstrap", 5000);
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
        Fail(ErrorCode::kSchema, "/seed: expected an integer");
      }
      options.seed = j["seed"].get<std::uint64_t>();
    }
    options.models = ModelOptions(j);
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
      Fail(ErrorCode::kDomain, "alpha must lie in (0, 1)");
    }
    std::vector<std::string> outcomes = study->table.outcome_names;
    if (j.contains("outcomes")) {
      outcomes.clear();
      for (const auto& o : j["outcomes"]) outcomes.push_back(o.get<std::string>());
    }
    auto reports = std::make_unique<rprct_reports>();
    for (const auto& name : outcomes) {
      const rprct::PrivateDataset data = study->table.ForOutcome(name);
      try {
        reports->reports.push_back(rprct::Analyze(data, design->spec, name, options));
      } catch (const rprct::Error& e) {
        Fail(e.code(), "outcome '" + name + "': " + e.what());
      }
    }
    *out = reports.release();
  });
}

void rprct_reports_free(rprct_reports* reports) { delete reports; }

rprct_status rprct_reports_count(const rprct_reports* reports, size_t* out) {
  return Guard([&] {
    NotNull(reports, "reports");
    NotNull(out, "out");
    *out = reports->reports.size();
  });
}

rprct_status rprct_reports_render(const rprct_reports* reports,
                                  const char* format, char** out) {
  return Guard([&] {
    NotNull(reports, "reports");
    NotNull(format, "format");
    NotNull(out, "out");
    *out = CopyString(rprct::io::RenderReport(
        reports->reports, rprct::io::ParseReportFormat(format)));
  });
}

}  // extern "C"
