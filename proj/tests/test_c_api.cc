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

// Exercises the C interface through the shared library only.

#include "rprct/rprct.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gtest/gtest.h"

namespace {

using Json = nlohmann::json;

std::string Take(char* str) {
  std::string copy = str;
  rprct_string_free(str);
  return copy;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* const kFixtures = RPRCT_FIXTURE_DIR;

TEST(CApiTest, MechanismFunctions) {
  double eps = 0;
  ASSERT_EQ(rprct_epsilon_symmetric(0.1, 0.2, &eps), RPRCT_OK);
  EXPECT_NEAR(eps, std::log(2 / 0.3 - 1), 1e-12);
  ASSERT_EQ(rprct_epsilon_symmetric(0, 0, &eps), RPRCT_OK);
  EXPECT_TRUE(std::isinf(eps));
  EXPECT_EQ(rprct_epsilon_symmetric(0.7, 0.2, &eps), RPRCT_E_DOMAIN);
  EXPECT_NE(std::string(rprct_last_error()), "");
  EXPECT_EQ(rprct_epsilon_symmetric(0.1, 0.2, nullptr), RPRCT_E_INVALID_ARGUMENT);

  const double r0[] = {0.1, 0.2}, r1[] = {0.1, 0.2}, w[] = {0.5, 0.5};
  double general = 0;
  ASSERT_EQ(rprct_epsilon_general(r0, r1, w, 2, &general), RPRCT_OK);
  EXPECT_NEAR(general, std::log(2 / 0.3 - 1), 1e-12);
  double p = 0;
  ASSERT_EQ(rprct_response_probability(0.1, 0.2, 1, &p), RPRCT_OK);
  EXPECT_NEAR(p, 0.9, 1e-15);
  EXPECT_STREQ(rprct_status_name(RPRCT_E_UNIDENTIFIED), "unidentified");
  EXPECT_EQ(rprct_status_is_statistical(RPRCT_E_DEGENERATE), 1);
  EXPECT_EQ(rprct_status_is_statistical(RPRCT_E_SCHEMA), 0);
}

TEST(CApiTest, DesignHandles) {
  rprct_design* design = nullptr;
  ASSERT_EQ(rprct_design_from_epsilon(2.0, 0.06, 0.5, &design), RPRCT_OK);
  double eps = 0, factor = 0;
  ASSERT_EQ(rprct_design_epsilon(design, &eps), RPRCT_OK);
  EXPECT_NEAR(eps, 2.0, 1e-9);
  ASSERT_EQ(rprct_design_masking_factor(design, &factor), RPRCT_OK);
  EXPECT_NEAR(factor, 1 - 2 / (std::exp(2.0) + 1), 1e-12);
  char* text = nullptr;
  ASSERT_EQ(rprct_design_report(design, 0.5, 0.5, &text), RPRCT_OK);
  const Json report = Json::parse(Take(text));
  EXPECT_NEAR(report["efficiency"]["relative_efficiency"].get<double>(), 0.580, 1e-3);
  ASSERT_EQ(rprct_design_to_json(design, &text), RPRCT_OK);
  rprct_design* copy = nullptr;
  ASSERT_EQ(rprct_design_from_json(Take(text).c_str(), &copy), RPRCT_OK);
  rprct_design_free(copy);
  rprct_design_free(design);
  rprct_design_free(nullptr);

  EXPECT_EQ(rprct_design_create(0.5, 0.2, 0.2, 0.2, 0.2, &design), RPRCT_E_INVALID_ARGUMENT);
  EXPECT_EQ(rprct_design_from_json("{not json", &design), RPRCT_E_SCHEMA);
  EXPECT_EQ(rprct_design_epsilon(nullptr, &eps), RPRCT_E_INVALID_ARGUMENT);

  double r = 0, rp = 0;
  ASSERT_EQ(rprct_solve_frr(2.0, 0.06, &r, &rp), RPRCT_OK);
  EXPECT_NEAR(r - rp, 0.06, 1e-12);
  double re = 0, infl = 0, mult = 0;
  ASSERT_EQ(rprct_relative_efficiency(2.0, 0.5, 0.5, 0.5, &re, &infl, &mult), RPRCT_OK);
  EXPECT_NEAR(infl, 1.313, 1e-3);
  std::uint64_t n = 0;
  ASSERT_EQ(rprct_sample_size(INFINITY, 0.5, 0.5, 0.5, 0.8, 0.05, 0.2, &n), RPRCT_OK);
  EXPECT_GT(n, 0u);
}

TEST(CApiTest, StudyEstimateAndRender) {
  const std::string dir = kFixtures;
  rprct_study* study = nullptr;
  const std::string schema = Slurp(dir + "/case_study.schema.json");
  ASSERT_EQ(rprct_study_read((dir + "/case_study.csv").c_str(), schema.c_str(), &study),
            RPRCT_OK)
      << rprct_last_error();
  size_t rows = 0, outcomes = 0;
  rprct_study_rows(study, &rows);
  rprct_study_outcome_count(study, &outcomes);
  EXPECT_EQ(rows, 72u);
  EXPECT_EQ(outcomes, 4u);

  rprct_design* design = nullptr;
  ASSERT_EQ(rprct_design_from_json(Slurp(dir + "/case_study.design.json").c_str(), &design),
            RPRCT_OK);
  rprct_reports* reports = nullptr;
  ASSERT_EQ(rprct_estimate(study, design, R"({"bootstrap": 200, "seed": 3})", &reports),
            RPRCT_OK)
      << rprct_last_error();
  size_t count = 0;
  rprct_reports_count(reports, &count);
  EXPECT_EQ(count, 4u);
  char* md = nullptr;
  ASSERT_EQ(rprct_reports_render(reports, "markdown", &md), RPRCT_OK);
  const std::string table = Take(md);
  EXPECT_NE(table.find("| comprehension |"), std::string::npos);
  EXPECT_EQ(rprct_reports_render(reports, "yaml", &md), RPRCT_E_INVALID_ARGUMENT);
  rprct_reports_free(reports);

  EXPECT_EQ(rprct_estimate(study, design, R"({"outcomes": ["nope"]})", &reports),
            RPRCT_E_INVALID_ARGUMENT);
  rprct_design_free(design);
  rprct_study_free(study);

  EXPECT_EQ(rprct_study_read("/nonexistent.csv", nullptr, &study), RPRCT_E_IO);
}

TEST(CApiTest, SimulateReplicatePower) {
  const std::string config = Slurp(std::string(RPRCT_SOURCE_DIR) + "/configs/basic.json");
  const auto dir = std::filesystem::temp_directory_path() / "rprct_c_api_test";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "sim").string();
  ASSERT_EQ(rprct_simulate(config.c_str(), 9, prefix.c_str()), RPRCT_OK) << rprct_last_error();
  EXPECT_TRUE(std::filesystem::exists(prefix + ".csv"));
  EXPECT_TRUE(std::filesystem::exists(prefix + ".truth.csv"));
  EXPECT_TRUE(std::filesystem::exists(prefix + ".schema.json"));
  const std::string first = Slurp(prefix + ".csv");
  ASSERT_EQ(rprct_simulate(config.c_str(), 9, prefix.c_str()), RPRCT_OK);
  EXPECT_EQ(Slurp(prefix + ".csv"), first);
  std::filesystem::remove_all(dir);

  char* out = nullptr;
  ASSERT_EQ(rprct_replicate(config.c_str(), 1, 5, R"({"methods": ["h_diff", "diff"]})", &out),
            RPRCT_OK)
      << rprct_last_error();
  const Json summary = Json::parse(Take(out))["summary"];
  EXPECT_EQ(summary["replicates"], 5);
  EXPECT_EQ(summary["methods"].size(), 2u);
  EXPECT_EQ(rprct_replicate(config.c_str(), 1, 0, nullptr, &out), RPRCT_E_INVALID_ARGUMENT);

  ASSERT_EQ(rprct_power(config.c_str(), nullptr, R"({"kind": "effect", "values": [0, 1]})", 1,
                        3, nullptr, &out),
            RPRCT_OK)
      << rprct_last_error();
  EXPECT_EQ(Json::parse(Take(out))["points"].size(), 2u);
  EXPECT_EQ(rprct_power(config.c_str(), nullptr, R"({"kind": "size"})", 1, 3, nullptr, &out),
            RPRCT_E_SCHEMA);
}

}  // namespace
