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

// Estimators for an RP-RCT: cheater proportion, effect among honest
// participants (difference in means and doubly robust), classical RCT
// baselines, Wald inference, the bootstrap, and covariate balance.

#ifndef RPRCT_ESTIMATE_HPP_
#define RPRCT_ESTIMATE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rprct/dataset.hpp"
#include "rprct/design.hpp"
#include "rprct/glm.hpp"

namespace rprct {

// Reported standard errors are floored here (with a degenerate-data warning).
inline constexpr double kSeFloor = 1e-8;
// (1 - lambda) * masking factor must exceed this for the effect to be scaled.
inline constexpr double kDenominatorTolerance = 1e-3;
// |identification gap| below this leaves lambda unidentified.
inline constexpr double kGapTolerance = 1e-6;
// Upper boundary candidate for the cheater proportion.
inline constexpr double kLambdaUpper = 1.0 - 1e-6;

struct CheaterEstimate {
  double lambda_hat = 0.0;
  double se = 0.0;
  // n-scaled plug-in variance, the Var(lambda-hat) term of the effect
  // variance formulas.
  double scaled_variance = 0.0;
  double raw_value = 0.0;
  bool boundary_corrected = false;

  // A fixed, known proportion (no sampling variance).
  static CheaterEstimate Known(double lambda);
};

enum class Method { kHDiff, kHCov, kDiff, kCov };

std::string MethodName(Method method);
Method ParseMethod(const std::string& name);

struct EffectEstimate {
  double tau_hat = 0.0;
  double se_analytic = 0.0;
  std::optional<double> se_bootstrap;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
  Method method = Method::kHDiff;
  std::optional<CheaterEstimate> lambda;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

// Two-sided standard Normal quantile z_{1 - alpha/2}.
double CriticalValue(double alpha);

struct SplitMeans {
  std::size_t n1 = 0, n2 = 0;
  std::size_t ones1 = 0, ones2 = 0;
  double mean1() const { return static_cast<double>(ones1) / n1; }
  double mean2() const { return static_cast<double>(ones2) / n2; }
};

struct ArmMeans {
  std::size_t treated = 0, control = 0;
  std::size_t ones_treated = 0, ones_control = 0;
  double mean_treated() const {
    return static_cast<double>(ones_treated) / treated;
  }
  double mean_control() const {
    return static_cast<double>(ones_control) / control;
  }
};

SplitMeans CountSplits(std::span<const std::uint8_t> y,
                       std::span<const std::uint8_t> s);
ArmMeans CountArms(std::span<const std::uint8_t> y,
                   std::span<const std::uint8_t> a);

// Moment estimator of the cheater proportion with the boundary-likelihood
// correction when the raw value leaves [0, 1].
CheaterEstimate EstimateLambda(const PrivateDataset& data,
                               const DesignSpec& spec);

// Profile log-likelihood of the per-split counts under the model in which
// cheaters always report 0, maximized over the honest mean on a 1e-4 grid.
double ProfileLogLikelihood(const SplitMeans& counts, const DesignSpec& spec,
                            double lambda);

EffectEstimate EstimateTauHDiff(const PrivateDataset& data,
                                const DesignSpec& spec,
                                const CheaterEstimate& lambda,
                                double alpha = 0.05);

// Doubly robust estimator; f1, f0 are working-model predictions for every
// row. Divides by the design delta, not the realized treated fraction.
EffectEstimate EstimateTauHCov(const PrivateDataset& data,
                               const DesignSpec& spec,
                               const CheaterEstimate& lambda,
                               std::span<const double> f1,
                               std::span<const double> f0,
                               double alpha = 0.05);

struct ClassicalEstimates {
  EffectEstimate diff;
  EffectEstimate cov;
};

// Baselines on true (non-private) outcomes. Without predictions the
// covariate-adjusted estimator uses f1 = f0 = 0.
ClassicalEstimates EstimateClassical(std::span<const std::uint8_t> y,
                                     std::span<const std::uint8_t> a,
                                     std::span<const double> f1 = {},
                                     std::span<const double> f0 = {},
                                     double alpha = 0.05);

struct WaldResult {
  double statistic;
  double p_value;
  bool reject;
};

WaldResult WaldTest(const EffectEstimate& estimate, double tau0 = 0.0);

// Working-model configuration for the doubly robust estimator.
enum class WorkingModelKind {
  kAicBackward,     // stepwise AIC per arm
  kAicForward,
  kAllCovariates,   // every covariate, no selection
  kInterceptOnly,
  kZero,            // f1 = f0 = 0
};

std::string WorkingModelKindName(WorkingModelKind kind);
WorkingModelKind ParseWorkingModelKind(const std::string& name);

struct WorkingModels {
  WorkingModelKind kind = WorkingModelKind::kAicBackward;
  std::optional<glm::LogisticModel> treated;
  std::optional<glm::LogisticModel> control;
  std::vector<double> f1;
  std::vector<double> f0;
};

struct WorkingModelOptions {
  WorkingModelKind kind = WorkingModelKind::kAicBackward;
  // Covariate indices offered to the models (empty = all).
  std::vector<std::size_t> candidates;
  bool missing_indicators = false;
};

// Fits f1 on treated rows and f0 on control rows (privatized outcomes) and
// predicts both for every row.
WorkingModels FitWorkingModels(const PrivateDataset& data,
                               const WorkingModelOptions& options);

// Refits already selected models on new data (used inside the bootstrap).
WorkingModels RefitWorkingModels(const WorkingModels& models,
                                 const PrivateDataset& data);

struct BootstrapResult {
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replicates = 0;
  std::size_t skipped = 0;
  std::vector<double> values;
};

// Quantities re-estimated on each resample.
enum class BootstrapTarget { kLambda, kHDiff, kHCov };

struct BootstrapOptions {
  std::size_t resamples = 5000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t workers = 0;  // 0 = DefaultWorkerCount()
  // Used for kHCov: models refit on each resample.
  const WorkingModels* models = nullptr;
};

// Nonparametric row bootstrap. Resamples whose estimation fails on
// degenerate data are skipped and counted; more than 1% skipped is an error.
// Returns one result per requested target.
std::vector<BootstrapResult> Bootstrap(const PrivateDataset& data,
                                       const DesignSpec& spec,
                                       std::span<const BootstrapTarget> targets,
                                       const BootstrapOptions& options);

BootstrapResult BootstrapSe(const PrivateDataset& data, const DesignSpec& spec,
                            BootstrapTarget target,
                            const BootstrapOptions& options);

struct BalanceRow {
  std::string covariate;  // "name" or "name=level" for categorical dummies
  double mean_treated = 0.0;
  double mean_control = 0.0;
  std::optional<double> smd;  // empty when the pooled SD is 0 or all missing
  double missing_treated = 0.0;
  double missing_control = 0.0;
  bool flagged = false;
};

inline constexpr double kBalanceFlagThreshold = 0.1;

std::vector<BalanceRow> CovariateBalance(const PrivateDataset& data);

// Full per-outcome analysis as run by the `estimate` command.
struct EstimateOptions {
  double alpha = 0.05;
  std::size_t bootstrap = 5000;
  std::uint64_t seed = 0;
  WorkingModelOptions models;
  std::size_t workers = 0;
};

struct EstimateReport {
  std::string outcome;
  std::size_t n = 0;
  CheaterEstimate lambda;
  std::optional<double> lambda_se_bootstrap;
  EffectEstimate hdiff;
  std::optional<EffectEstimate> hcov;
  WaldResult hdiff_wald{};
  std::optional<WaldResult> hcov_wald;
  std::optional<BootstrapResult> hdiff_bootstrap;
  std::optional<BootstrapResult> hcov_bootstrap;
  std::optional<glm::ModelSummary> model_treated;
  std::optional<glm::ModelSummary> model_control;
  std::string working_models;
  std::vector<BalanceRow> balance;
  double alpha = 0.05;
  std::size_t bootstrap_resamples = 0;
  std::vector<std::string> warnings;
};

EstimateReport Analyze(const PrivateDataset& data, const DesignSpec& spec,
                       const std::string& outcome,
                       const EstimateOptions& options);

}  // namespace rprct

#endif  // RPRCT_ESTIMATE_HPP_
