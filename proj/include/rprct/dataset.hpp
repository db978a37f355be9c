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

#ifndef RPRCT_DATASET_HPP_
#define RPRCT_DATASET_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rprct {

enum class CovariateKind { kBinary, kCategorical, kNumeric };

std::string CovariateKindName(CovariateKind kind);
CovariateKind ParseCovariateKind(const std::string& name);

// One pre-treatment covariate column. Missing entries are NaN. Categorical
// values are stored as indices into `levels`.
struct Covariate {
  std::string name;
  CovariateKind kind = CovariateKind::kNumeric;
  std::vector<std::string> levels;
  std::vector<double> values;

  static bool IsMissing(double v) { return std::isnan(v); }
  std::size_t missing_count() const;

  friend bool operator==(const Covariate& a, const Covariate& b);
};

// What the investigator observes for one outcome: privatized response,
// treatment, subsample, and optional covariates. Contains nothing latent.
class PrivateDataset {
 public:
  PrivateDataset() = default;

  // Validates y_tilde, a in {0,1}, s in {1,2} and equal column lengths.
  PrivateDataset(std::vector<std::uint8_t> y_tilde, std::vector<std::uint8_t> a,
                 std::vector<std::uint8_t> s,
                 std::vector<Covariate> covariates = {},
                 std::vector<std::string> ids = {});

  std::size_t size() const { return y_tilde_.size(); }
  bool empty() const { return y_tilde_.empty(); }

  std::span<const std::uint8_t> y_tilde() const { return y_tilde_; }
  std::span<const std::uint8_t> a() const { return a_; }
  std::span<const std::uint8_t> s() const { return s_; }
  const std::vector<Covariate>& covariates() const { return covariates_; }
  const std::vector<std::string>& ids() const { return ids_; }
  bool has_covariates() const { return !covariates_.empty(); }

  // Row subset in the given order (duplicates allowed, as in resampling).
  // Covariates are copied only when `with_covariates` is set.
  PrivateDataset Select(std::span<const std::size_t> rows,
                        bool with_covariates = true) const;

  // Same rows with subsample labels 1 and 2 exchanged.
  PrivateDataset SwapSubsamples() const;

  friend bool operator==(const PrivateDataset&, const PrivateDataset&) = default;

 private:
  std::vector<std::uint8_t> y_tilde_;
  std::vector<std::uint8_t> a_;
  std::vector<std::uint8_t> s_;
  std::vector<Covariate> covariates_;
  std::vector<std::string> ids_;
};

// Several privatized outcomes sharing treatment, subsample and covariates
// (one row per participant), as in a multi-question survey.
struct StudyTable {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> a;
  std::vector<std::uint8_t> s;
  std::vector<std::string> outcome_names;
  std::vector<std::vector<std::uint8_t>> outcomes;
  std::vector<Covariate> covariates;

  std::size_t size() const { return a.size(); }
  PrivateDataset ForOutcome(std::size_t index) const;
  PrivateDataset ForOutcome(const std::string& name) const;
};

}  // namespace rprct

#endif  // RPRCT_DATASET_HPP_
