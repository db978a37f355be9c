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

// Logistic regression for the outcome working models: damped IRLS fitting,
// AIC, and stepwise term selection over covariates with missing values.

#ifndef RPRCT_GLM_HPP_
#define RPRCT_GLM_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rprct/dataset.hpp"

namespace rprct::glm {

struct FitOptions {
  int max_iterations = 100;
  double score_tolerance = 1e-8;
  // Coefficient norm beyond which the data are treated as separable.
  double divergence_norm = 1e3;
  // Drop linearly dependent columns (coefficient fixed at 0) instead of
  // failing with kRankDeficient.
  bool drop_dependent_columns = false;
  // Starting coefficients (one per design column); empty starts at zero.
  Eigen::VectorXd initial;
};

// Result of fitting on an explicit design matrix (intercept column included
// by the caller).
struct MatrixFit {
  Eigen::VectorXd coefficients;
  std::vector<bool> active;  // false for dropped columns
  bool converged = false;
  bool separated = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double score_max_norm = 0.0;
  // Log-likelihood after each accepted step, starting from the initial point.
  std::vector<double> likelihood_trace;

  int estimated_parameters() const;
};

MatrixFit Fit(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y,
              const FitOptions& options = {});

double LogLikelihood(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y,
                     const Eigen::VectorXd& beta);
Eigen::VectorXd Score(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y,
                      const Eigen::VectorXd& beta);

inline double Aic(int parameters, double log_likelihood) {
  return 2.0 * parameters - 2.0 * log_likelihood;
}

// Turns covariate columns into design-matrix columns: numeric and binary
// covariates give one column, categorical ones give one dummy per non
// reference level. Missing entries are imputed by the training mean of each
// column; with `missing_indicators` an extra 0/1 column is added for every
// covariate that had missing training values.
class CovariateEncoder {
 public:
  CovariateEncoder() = default;
  CovariateEncoder(const std::vector<Covariate>& training,
                   bool missing_indicators = false);

  std::size_t term_count() const { return terms_.size(); }
  const std::string& term_name(std::size_t term) const { return terms_[term].name; }
  std::size_t column_count() const { return column_names_.size(); }
  const std::vector<std::string>& column_names() const { return column_names_; }
  // Design columns (excluding intercept) belonging to a term.
  const std::vector<std::size_t>& term_columns(std::size_t term) const {
    return terms_[term].columns;
  }
  const std::vector<double>& imputation_means() const { return means_; }
  bool missing_indicators() const { return missing_indicators_; }

  // Encodes covariate row `row`; result has column_count() entries.
  void EncodeRow(const std::vector<Covariate>& covariates, std::size_t row,
                 std::span<double> out) const;

  // n x (1 + selected columns) matrix with a leading intercept column. An
  // empty mask selects every term.
  Eigen::MatrixXd DesignMatrix(const std::vector<Covariate>& covariates,
                               const std::vector<bool>& included_terms) const;

 private:
  struct Term {
    std::string name;
    std::size_t source;  // index into the covariate vector
    CovariateKind kind;
    std::vector<std::string> levels;
    std::vector<std::size_t> columns;
    bool has_indicator = false;
  };

  std::vector<Term> terms_;
  std::vector<std::string> column_names_;
  std::vector<double> means_;
  bool missing_indicators_ = false;
};

struct AicStep {
  std::string action;  // "start", "drop <term>" or "add <term>"
  double aic;

  friend bool operator==(const AicStep&, const AicStep&) = default;
};

// A fitted working model over covariate terms.
struct LogisticModel {
  CovariateEncoder encoder;
  std::vector<bool> included_terms;
  // Intercept first, then one entry per encoder column (0 for excluded).
  Eigen::VectorXd coefficients;
  bool converged = false;
  double log_likelihood = 0.0;
  double aic = 0.0;
  int parameters = 0;
  std::vector<AicStep> aic_path;

  std::vector<std::string> coefficient_names() const;
};

// Serializable digest of a LogisticModel.
struct ModelSummary {
  std::vector<std::string> terms;  // included terms
  std::vector<std::string> coefficient_names;
  std::vector<double> coefficients;
  bool converged = false;
  double log_likelihood = 0.0;
  double aic = 0.0;
  std::vector<AicStep> aic_path;

  friend bool operator==(const ModelSummary&, const ModelSummary&) = default;
};

ModelSummary Summarize(const LogisticModel& model);

// Fits the terms flagged in `included_terms` (all terms when empty).
LogisticModel FitModel(const std::vector<Covariate>& covariates,
                       std::span<const std::uint8_t> y,
                       std::vector<bool> included_terms = {},
                       const FitOptions& options = {},
                       bool missing_indicators = false);

// Refits the same terms with the same encoding on new rows.
LogisticModel Refit(const LogisticModel& model,
                    const std::vector<Covariate>& covariates,
                    std::span<const std::uint8_t> y,
                    const FitOptions& options = {});

enum class Direction { kBackward, kForward };

struct SelectionOptions {
  Direction direction = Direction::kBackward;
  bool missing_indicators = false;
  FitOptions fit;
};

// Stepwise AIC selection among `candidates` (indices into `covariates`).
// Backward: start from all candidates and repeatedly drop the term whose
// removal lowers AIC the most. Forward: start from the intercept and add.
// Ties go to the lowest covariate index.
LogisticModel SelectAic(const std::vector<Covariate>& covariates,
                        std::span<const std::uint8_t> y,
                        const std::vector<std::size_t>& candidates,
                        const SelectionOptions& options = {});

// Prediction for covariate row `row`; missing entries use the training mean.
double Predict(const LogisticModel& model,
               const std::vector<Covariate>& covariates, std::size_t row);

std::vector<double> PredictAll(const LogisticModel& model,
                               const std::vector<Covariate>& covariates);

inline double Logistic(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta))
                  : std::exp(eta) / (1.0 + std::exp(eta));
}

}  // namespace rprct::glm

#endif  // RPRCT_GLM_HPP_
