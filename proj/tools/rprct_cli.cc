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

// rprct command-line interface. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rprct/rprct.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitStatistical = 1;
constexpr int kExitUsage = 2;

// Library failure carrying its status code.
struct StatusError {
  rprct_status status;
  std::string message;
};

struct UsageError {
  std::string message;
};

void Check(rprct_status status) {
  if (status != RPRCT_OK) throw StatusError{status, rprct_last_error()};
}

std::string TakeString(char* s) {
  std::string out(s);
  rprct_string_free(s);
  return out;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StatusError{RPRCT_E_IO, "cannot open '" + path + "' for reading"};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json ParseDocument(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw StatusError{RPRCT_E_SCHEMA, what + " is not valid JSON: " + e.what()};
  }
}

struct DesignDeleter {
  void operator()(rprct_design* d) const { rprct_design_free(d); }
};
struct StudyDeleter {
  void operator()(rprct_study* s) const { rprct_study_free(s); }
};
struct ReportsDeleter {
  void operator()(rprct_reports* r) const { rprct_reports_free(r); }
};
using DesignPtr = std::unique_ptr<rprct_design, DesignDeleter>;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  std::string out;
};

void Emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    std::cout.flush();
    return;
  }
  std::ofstream out(g.out, std::ios::binary | std::ios::trunc);
  if (!out) throw StatusError{RPRCT_E_IO, "cannot open '" + g.out + "' for writing"};
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw StatusError{RPRCT_E_IO, "error while writing '" + g.out + "'"};
}

std::string Number(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string JsonCell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return Number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Two-column rendering of a flat list of (key, value) rows.
std::string RenderPairs(const std::vector<std::pair<std::string, std::string>>& rows,
                        const std::string& format) {
  std::ostringstream out;
  if (format == "markdown") {
    out << "| Quantity | Value |\n|---|---|\n";
    for (const auto& [k, v] : rows) out << "| " << k << " | " << v << " |\n";
  } else {
    out << "quantity,value\n";
    for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
  }
  return out.str();
}

std::string RenderTable(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows,
                        const std::string& format) {
  std::ostringstream out;
  auto join = [&](const std::vector<std::string>& cells, const char* sep) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? sep : "") << cells[i];
  };
  if (format == "markdown") {
    out << "| ";
    join(header, " | ");
    out << " |\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& r : rows) {
      out << "| ";
      join(r, " | ");
      out << " |\n";
    }
  } else {
    join(header, ",");
    out << '\n';
    for (const auto& r : rows) {
      join(r, ",");
      out << '\n';
    }
  }
  return out.str();
}

// ---- design ----------------------------------------------------------------

struct DesignArgs {
  std::optional<double> epsilon, r, r_prime, effect;
  std::string design_path;
  double gap = 0.06, delta = 0.5, tau0 = 0.5, tau1 = 0.5;
  double power = 0.8, alpha = 0.05;
};

void RunDesign(const GlobalOptions& g, const DesignArgs& a, const CLI::App& cmd) {
  const bool from_eps = a.epsilon.has_value();
  const bool from_r = a.r.has_value() || a.r_prime.has_value();
  const bool from_file = !a.design_path.empty();
  if (from_eps + from_r + from_file != 1) {
    throw UsageError{"give exactly one of --epsilon, --r/--r-prime or --design"};
  }
  if (from_r && !(a.r && a.r_prime)) {
    throw UsageError{"--r and --r-prime must be given together"};
  }
  if (!from_eps && cmd.count("--gap") > 0) {
    throw UsageError{"--gap only applies together with --epsilon"};
  }
  rprct_design* raw = nullptr;
  if (from_eps) {
    Check(rprct_design_from_epsilon(*a.epsilon, a.gap, a.delta, &raw));
  } else if (from_r) {
    Check(rprct_design_create(a.delta, *a.r, *a.r, *a.r_prime, *a.r_prime, &raw));
  } else {
    Check(rprct_design_from_json(ReadText(a.design_path).c_str(), &raw));
  }
  DesignPtr design(raw);
  char* text = nullptr;
  Check(rprct_design_report(design.get(), a.tau0, a.tau1, &text));
  Json report = ParseDocument(TakeString(text), "design report");
  if (a.effect) {
    double eps = 0.0;
    Check(rprct_design_epsilon(design.get(), &eps));
    std::uint64_t n = 0;
    Check(rprct_sample_size(eps, report["design"]["delta"].get<double>(), a.tau0, a.tau1,
                            a.power, a.alpha, *a.effect, &n));
    report["sample_size"] = Json{{"effect", *a.effect},
                                 {"power", a.power},
                                 {"alpha", a.alpha},
                                 {"n", n}};
  }
  if (g.format == "json") {
    Emit(g, report.dump(2));
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  const Json& d = report["design"];
  rows.emplace_back("delta", JsonCell(d["delta"]));
  rows.emplace_back("frr1 (r0, r1)",
                    "(" + JsonCell(d["frr1"]["r0"]) + " " + JsonCell(d["frr1"]["r1"]) + ")");
  rows.emplace_back("frr2 (r0, r1)",
                    "(" + JsonCell(d["frr2"]["r0"]) + " " + JsonCell(d["frr2"]["r1"]) + ")");
  for (const char* k : {"strict", "symmetric_formula", "one_sided"}) {
    rows.emplace_back(std::string("epsilon ") + k, JsonCell(report["epsilon"][k]));
  }
  for (const auto& item : report["efficiency"].items()) {
    rows.emplace_back(item.key(), JsonCell(item.value()));
  }
  rows.emplace_back("masking_factor", JsonCell(report["masking_factor"]));
  rows.emplace_back("identification_gap", JsonCell(report["identification_gap"]));
  if (report.contains("sample_size")) {
    rows.emplace_back("sample_size", JsonCell(report["sample_size"]["n"]));
  }
  for (const auto& w : report["warnings"]) rows.emplace_back("warning", w.get<std::string>());
  Emit(g, RenderPairs(rows, g.format));
}

// ---- simulation options shared by simulate and power ------------------------

struct MonteCarloArgs {
  std::string config_path;
  std::size_t reps = 1;
  std::size_t bootstrap = 0;
  double alpha = 0.05;
  std::string methods = "h_diff";
  std::string working_models = "aic";
  std::optional<double> known_lambda;
  bool missing_indicators = false;
};

Json MonteCarloOptions(const MonteCarloArgs& a) {
  Json methods = Json::array();
  std::stringstream ss(a.methods);
  for (std::string m; std::getline(ss, m, ',');) {
    if (!m.empty()) methods.push_back(m);
  }
  Json options{{"methods", methods},
               {"bootstrap", a.bootstrap},
               {"alpha", a.alpha},
               {"working_models", a.working_models},
               {"missing_indicators", a.missing_indicators}};
  if (a.known_lambda) options["known_lambda"] = *a.known_lambda;
  return options;
}

void AddMonteCarloFlags(CLI::App* cmd, MonteCarloArgs& a) {
  cmd->add_option("--bootstrap", a.bootstrap,
                  "Bootstrap resamples per replicate (0 = analytic only)");
  cmd->add_option("--alpha", a.alpha, "Test level / CI miscoverage")
      ->check(CLI::Range(0.0, 1.0).description("alpha in (0,1)"));
  cmd->add_option("--methods", a.methods,
                  "Comma-separated estimators: h_diff, h_cov, diff, cov");
  cmd->add_option("--working-models", a.working_models,
                  "Working models for h_cov: aic, aic_forward, all, intercept, zero");
  cmd->add_option("--known-lambda", a.known_lambda,
                  "Use this cheater proportion instead of estimating it");
  cmd->add_flag("--missing-indicators", a.missing_indicators,
                "Add missingness indicator columns to working models");
}


std::vector<std::string> MethodRow(const Json& m) {
  return {JsonCell(m["method"]),           JsonCell(m["replicates"]),
          JsonCell(m["failures"]),         JsonCell(m["mean"]),
          JsonCell(m["truth_mean"]),       JsonCell(m["bias"]),
          JsonCell(m["variance"]),         JsonCell(m["coverage"]),
          JsonCell(m["coverage_bootstrap"]), JsonCell(m["mean_se_analytic"]),
          JsonCell(m["mean_se_bootstrap"]), JsonCell(m["rejection_rate"])};
}

const std::vector<std::string> kMethodHeader = {
    "method",   "replicates", "failures",    "mean",
    "truth",    "bias",       "variance",    "coverage",
    "coverage_bootstrap", "mean_se", "mean_se_bootstrap", "rejection_rate"};

void RunSimulate(const GlobalOptions& g, const MonteCarloArgs& a) {
  if (!g.seed) throw UsageError{"simulate requires --seed"};
  if (a.reps < 1) throw UsageError{"--reps must be at least 1"};
  const std::string config = ReadText(a.config_path);
  if (a.reps == 1) {
    if (g.out.empty()) throw UsageError{"simulate needs --out <prefix> for a single run"};
    Check(rprct_simulate(config.c_str(), *g.seed, g.out.c_str()));
    return;
  }
  char* text = nullptr;
  Check(rprct_replicate(config.c_str(), *g.seed, a.reps,
                        MonteCarloOptions(a).dump().c_str(), &text));
  const Json doc = ParseDocument(TakeString(text), "summary");
  if (g.format == "json") {
    Emit(g, doc.dump(2));
    return;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : doc["summary"]["methods"]) rows.push_back(MethodRow(m));
  Emit(g, RenderTable(kMethodHeader, rows, g.format));
}

// ---- power -------------------------------------------------------------------

struct PowerArgs {
  MonteCarloArgs mc;
  std::string spec_path;
  std::string grid;
  std::optional<double> gap;
};

void RunPower(const GlobalOptions& g, const PowerArgs& a) {
  if (!g.seed) throw UsageError{"power requires --seed"};
  if (a.mc.reps < 1) throw UsageError{"--reps must be at least 1"};
  const auto colon = a.grid.find(':');
  if (colon == std::string::npos) {
    throw UsageError{"--grid must look like effect:0,0.2,0.4 or epsilon:1,2,4"};
  }
  const std::string kind = a.grid.substr(0, colon);
  if (kind != "effect" && kind != "epsilon") {
    throw UsageError{"--grid kind must be 'effect' or 'epsilon'"};
  }
  Json values = Json::array();
  std::stringstream ss(a.grid.substr(colon + 1));
  for (std::string v; std::getline(ss, v, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw UsageError{"--grid value '" + v + "' is not a number"};
    }
  }
  if (values.empty()) throw UsageError{"--grid has no values"};
  Json grid{{"kind", kind}, {"values", values}};
  if (a.gap) {
    if (kind != "epsilon") throw UsageError{"--gap only applies to epsilon grids"};
    grid["gap"] = *a.gap;
  }
  const std::string config = ReadText(a.mc.config_path);
  std::string design;
  if (!a.spec_path.empty()) design = ReadText(a.spec_path);
  char* text = nullptr;
  Check(rprct_power(config.c_str(), design.empty() ? nullptr : design.c_str(),
                    grid.dump().c_str(), *g.seed, a.mc.reps,
                    MonteCarloOptions(a.mc).dump().c_str(), &text));
  const Json doc = ParseDocument(TakeString(text), "power grid");
  if (g.format == "json") {
    Emit(g, doc.dump(2));
    return;
  }
  std::vector<std::string> header{kind};
  if (kind != "epsilon") header.push_back("epsilon");
  header.insert(header.end(), kMethodHeader.begin(), kMethodHeader.end());
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : doc["points"]) {
    for (const auto& m : p["summary"]["methods"]) {
      std::vector<std::string> row{JsonCell(p["value"])};
      if (kind != "epsilon") row.push_back(JsonCell(p["design"]["epsilon"]));
      const auto rest = MethodRow(m);
      row.insert(row.end(), rest.begin(), rest.end());
      rows.push_back(std::move(row));
    }
  }
  Emit(g, RenderTable(header, rows, g.format));
}

// ---- estimate ------------------------------------------------------------------

struct EstimateArgs {
  std::string data_path;
  std::string spec_path;
  std::string schema_path;
  std::vector<std::string> outcome_cols;
  std::size_t bootstrap = 5000;
  double alpha = 0.05;
  std::string working_models = "aic";
  bool missing_indicators = false;
  std::string missing_token;
};

void RunEstimate(const GlobalOptions& g, const EstimateArgs& a) {
  Json schema;
  if (!a.schema_path.empty()) {
    schema = ParseDocument(ReadText(a.schema_path), "schema");
  } else {
    schema = Json{{"infer_covariates", true}};
    if (!a.missing_token.empty()) schema["missing_token"] = a.missing_token;
  }
  // With declared outcome columns, --outcome-cols picks which to analyze.
  const bool declared = schema.contains("outcome_columns");
  if (!a.outcome_cols.empty() && !declared) schema["outcome_columns"] = a.outcome_cols;

  rprct_design* raw_design = nullptr;
  Check(rprct_design_from_json(ReadText(a.spec_path).c_str(), &raw_design));
  DesignPtr design(raw_design);

  rprct_study* raw_study = nullptr;
  Check(rprct_study_read(a.data_path.c_str(), schema.dump().c_str(), &raw_study));
  std::unique_ptr<rprct_study, StudyDeleter> study(raw_study);

  Json options{{"alpha", a.alpha},
               {"bootstrap", a.bootstrap},
               {"seed", g.seed.value_or(0)},
               {"working_models", a.working_models},
               {"missing_indicators", a.missing_indicators}};
  if (!a.outcome_cols.empty() && declared) options["outcomes"] = a.outcome_cols;
  rprct_reports* raw_reports = nullptr;
  Check(rprct_estimate(study.get(), design.get(), options.dump().c_str(), &raw_reports));
  std::unique_ptr<rprct_reports, ReportsDeleter> reports(raw_reports);
  char* text = nullptr;
  Check(rprct_reports_render(reports.get(), g.format.c_str(), &text));
  Emit(g, TakeString(text));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design, simulate and analyze randomized experiments with "
               "privatized binary outcomes (forced randomized response)."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(rprct_version()));

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Root random seed (required by simulate and power)");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"json", "markdown", "csv"}));
  app.add_option("--out", global.out,
                 "Output file (simulate: output prefix for a single run)");

  DesignArgs design_args;
  CLI::App* design = app.add_subcommand("design", "Privacy loss, FRR maps and cost of privacy");
  auto* eps = design->add_option("--epsilon", design_args.epsilon, "Target privacy loss");
  auto* r = design->add_option("--r", design_args.r, "Symmetric forced-response probability, subsample 1");
  auto* rp = design->add_option("--r-prime", design_args.r_prime,
                                "Symmetric forced-response probability, subsample 2");
  auto* file = design->add_option("--design", design_args.design_path, "Design JSON file");
  eps->excludes(r)->excludes(rp)->excludes(file);
  file->excludes(r)->excludes(rp);
  design->add_option("--gap", design_args.gap, "r - r' when solving from --epsilon")
      ->capture_default_str();
  design->add_option("--delta", design_args.delta, "Treatment probability")
      ->capture_default_str();
  design->add_option("--tau0", design_args.tau0, "Planning E[Y | A = 0]")->capture_default_str();
  design->add_option("--tau1", design_args.tau1, "Planning E[Y | A = 1]")->capture_default_str();
  design->add_option("--effect", design_args.effect, "Effect size for a sample-size quote");
  design->add_option("--power", design_args.power, "Target power")->capture_default_str();
  design->add_option("--alpha", design_args.alpha, "Test level")->capture_default_str();

  MonteCarloArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate one dataset or a Monte Carlo study");
  simulate->add_option("--config", sim_args.config_path, "Simulation JSON config")->required();
  simulate->add_option("--reps", sim_args.reps, "Replicates (1 writes dataset files)")
      ->capture_default_str();
  AddMonteCarloFlags(simulate, sim_args);

  EstimateArgs est_args;
  CLI::App* estimate = app.add_subcommand("estimate", "Analyze a privatized dataset");
  estimate->add_option("--data", est_args.data_path, "Observed CSV")->required();
  estimate->add_option("--spec", est_args.spec_path, "Design JSON (delta and both FRR maps)")
      ->required();
  estimate->add_option("--schema", est_args.schema_path,
                       "Dataset schema JSON (default: infer covariate columns)");
  estimate->add_option("--outcome-cols", est_args.outcome_cols, "Outcome column names")
      ->delimiter(',');
  estimate->add_option("--bootstrap", est_args.bootstrap, "Bootstrap resamples (0 = analytic only)")
      ->capture_default_str();
  estimate->add_option("--alpha", est_args.alpha, "Test level / CI miscoverage")
      ->check(CLI::Range(0.0, 1.0).description("alpha in (0,1)"))
      ->capture_default_str();
  estimate->add_option("--working-models", est_args.working_models,
                       "aic, aic_forward, all, intercept or zero")
      ->capture_default_str();
  estimate->add_flag("--missing-indicators", est_args.missing_indicators,
                     "Add missingness indicator columns to working models");
  estimate->add_option("--missing-token", est_args.missing_token,
                       "Cell text meaning missing (default: empty cell)");

  PowerArgs power_args;
  CLI::App* power = app.add_subcommand("power", "Power and coverage over an effect or epsilon grid");
  power->add_option("--config", power_args.mc.config_path, "Simulation JSON config")->required();
  power->add_option("--spec", power_args.spec_path, "Design JSON overriding the config's design");
  power->add_option("--reps", power_args.mc.reps, "Replicates per grid point")->required();
  power->add_option("--grid", power_args.grid, "effect:v1,v2,... or epsilon:v1,v2,...")
      ->required();
  power->add_option("--gap", power_args.gap,
                    "r - r' for epsilon grids (default: a third of r + r' per point)");
  AddMonteCarloFlags(power, power_args.mc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*design) {
      RunDesign(global, design_args, *design);
    } else if (*simulate) {
      RunSimulate(global, sim_args);
    } else if (*estimate) {
      RunEstimate(global, est_args);
    } else if (*power) {
      RunPower(global, power_args);
    }
  } catch (const UsageError& e) {
    std::cerr << "rprct: usage error: " << e.message << '\n';
    return kExitUsage;
  } catch (const StatusError& e) {
    std::cerr << "rprct: " << rprct_status_name(e.status) << ": " << e.message << '\n';
    return rprct_status_is_statistical(e.status) ? kExitStatistical : kExitUsage;
  }
  return kExitOk;
}
