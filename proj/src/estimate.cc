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

#include "rprct/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "rprct/parallel.hpp"
#include "rprct/random.hpp"
#include "rprct/status.hpp"

namespace rprct {

namespace {

constexpr double kProfileGridStep = 1e-4;
constexpr int kProfileGridPoints = 10000;
constexpr double kMaxSkippedFraction = 0.01;

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

double Denominator(const DesignSpec& spec, const CheaterEstimate& lambda) {
  const double denom = (1.0 - lambda.lambda_hat) * spec.masking_factor();
  if (!(denom > kDenominatorTolerance)) {
    Fail(ErrorCode::kDegenerate,
         "effect scale (1 - lambda) * masking factor = " + Fmt(denom) +
             " is below " + Fmt(kDenominatorTolerance) +
             "; the data look like all cheaters or the maps are too noisy "
             "(use smaller forced-response probabilities)");
  }
  return denom;
}

// Var(lambda-hat) / (1 - lambda-hat)^2, the lambda-noise share of the effect
// variance.
double LambdaVarianceRatio(const CheaterEstimate& lambda) {
  const double keep = 1.0 - lambda.lambda_hat;
  return lambda.scaled_variance / (keep * keep);
}

void FinishEstimate(EffectEstimate& est, double scaled_variance) {
  double se = std::sqrt(std::max(scaled_variance, 0.0) / est.n);
  if (!(se >= kSeFloor)) {
    se = kSeFloor;
    est.warnings.push_back(
        "degenerate data: analytic standard error floored at 1e-8");
  }
  est.se_analytic = se;
  const double z = CriticalValue(est.alpha);
  est.ci_low = est.tau_hat - z * se;
  est.ci_high = est.tau_hat + z * se;
}

void RequireArms(const ArmMeans& arms) {
  Require(arms.treated > 0 && arms.control > 0, ErrorCode::kDegenerate,
          "both treatment arms must be nonempty");
}

double Quantile(std::vector<double> sorted_values, double p) {
  // Linear interpolation between order statistics (type 7).
  std::sort(sorted_values.begin(), sorted_values.end());
  const double h = (sorted_values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo]);
}

std::vector<double> PredictRows(const glm::LogisticModel& model,
                                const PrivateDataset& data) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = glm::Predict(model, data.covariates(), i);
  }
  return out;
}

std::vector<std::size_t> ArmRows(const PrivateDataset& data, std::uint8_t arm) {
  std::vector<std::size_t> rows;
  const auto a = data.a();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == arm) rows.push_back(i);
  }
  return rows;
}

glm::FitOptions WorkingFitOptions() {
  glm::FitOptions options;
  options.drop_dependent_columns = true;
  return options;
}

}  // namespace

CheaterEstimate CheaterEstimate::Known(double lambda) {
  Require(lambda >= 0.0 && lambda < 1.0, ErrorCode::kDomain,
          "known cheater proportion must lie in [0, 1)");
  CheaterEstimate est;
  est.lambda_hat = lambda;
  est.raw_value = lambda;
  return est;
}

std::string MethodName(Method method) {
  switch (method) {
    case Method::kHDiff:
      return "h_diff";
    case Method::kHCov:
      return "h_cov";
    case Method::kDiff:
      return "diff";
    case Method::kCov:
      return "cov";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  for (Method m : {Method::kHDiff, Method::kHCov, Method::kDiff, Method::kCov}) {
    if (MethodName(m) == name) return m;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown method '" + name + "' (expected h_diff, h_cov, diff or cov)");
}

double CriticalValue(double alpha) {
  Require(alpha > 0.0 && alpha < 1.0, ErrorCode::kDomain,
          "alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
}

SplitMeans CountSplits(std::span<const std::uint8_t> y,
                       std::span<const std::uint8_t> s) {
  SplitMeans out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (s[i] == 1) {
      ++out.n1;
      out.ones1 += y[i];
    } else {
      ++out.n2;
      out.ones2 += y[i];
    }
  }
  return out;
}

ArmMeans CountArms(std::span<const std::uint8_t> y,
                   std::span<const std::uint8_t> a) {
  ArmMeans out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (a[i]) {
      ++out.treated;
      out.ones_treated += y[i];
    } else {
      ++out.control;
      out.ones_control += y[i];
    }
  }
  return out;
}

double ProfileLogLikelihood(const SplitMeans& counts, const DesignSpec& spec,
                            double lambda) {
  Require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::kDomain,
          "cheater proportion must lie in [0, 1]");
  const double keep = 1.0 - lambda;
  const FrrParams& f1 = spec.frr1();
  const FrrParams& f2 = spec.frr2();
  auto term = [](std::size_t ones, std::size_t total, double p) {
    const double zeros = static_cast<double>(total - ones);
    double ll = 0.0;
    if (ones > 0) ll += ones * (p > 0 ? std::log(p) : -HUGE_VAL);
    if (zeros > 0) ll += zeros * (p < 1 ? std::log1p(-p) : -HUGE_VAL);
    return ll;
  };
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kProfileGridPoints; ++k) {
    const double mu = k * kProfileGridStep;
    const double p1 = keep * (f1.r1() + f1.truth_probability() * mu);
    const double p2 = keep * (f2.r1() + f2.truth_probability() * mu);
    best = std::max(best, term(counts.ones1, counts.n1, p1) +
                              term(counts.ones2, counts.n2, p2));
  }
  return best;
}

CheaterEstimate EstimateLambda(const PrivateDataset& data,
                               const DesignSpec& spec) {
  const double gap = spec.identification_gap();
  if (!(std::abs(gap) >= kGapTolerance)) {
    Fail(ErrorCode::kUnidentified,
         "cheater proportion is not identified: the two FRR maps are too close "
         "(choose maps whose forced-response probabilities differ)");
  }
  const SplitMeans counts = CountSplits(data.y_tilde(), data.s());
  Require(counts.n1 > 0 && counts.n2 > 0, ErrorCode::kDegenerate,
          "both subsamples must be nonempty to estimate the cheater proportion");

  const double m1 = spec.frr1().truth_probability();
  const double m2 = spec.frr2().truth_probability();
  const double q1 = counts.mean1();
  const double q2 = counts.mean2();
  const double n = static_cast<double>(data.size());

  CheaterEstimate est;
  est.raw_value = 1.0 - (m2 * q1 - m1 * q2) / gap;
  est.scaled_variance = (m2 * m2 * q1 * (1.0 - q1) / (counts.n1 / n) +
                         m1 * m1 * q2 * (1.0 - q2) / (counts.n2 / n)) /
                        (gap * gap);
  est.lambda_hat = est.raw_value;

  const double raw = est.raw_value;
  bool compare = !(raw >= 0.0 && raw <= 1.0);
  if (!compare) {
    // The raw value is the likelihood maximizer only if it implies an honest
    // mean inside [0, 1].
    if (raw >= 1.0) {
      compare = true;
    } else {
      const double mu = (q1 / (1.0 - raw) - spec.frr1().r1()) / m1;
      compare = !(mu >= 0.0 && mu <= 1.0);
    }
  }
  if (compare) {
    std::vector<double> candidates;
    if (raw >= 0.0 && raw <= 1.0) candidates.push_back(raw);
    candidates.push_back(0.0);
    candidates.push_back(kLambdaUpper);
    double best_ll = -std::numeric_limits<double>::infinity();
    double best = candidates.front();
    for (double c : candidates) {
      const double ll = ProfileLogLikelihood(counts, spec, c);
      if (ll > best_ll) {
        best_ll = ll;
        best = c;
      }
    }
    est.lambda_hat = best;
    est.boundary_corrected = best != raw;
  }
  est.se = std::max(std::sqrt(est.scaled_variance / n), kSeFloor);
  return est;
}

EffectEstimate EstimateTauHDiff(const PrivateDataset& data,
                                const DesignSpec& spec,
                                const CheaterEstimate& lambda, double alpha) {
  const ArmMeans arms = CountArms(data.y_tilde(), data.a());
  RequireArms(arms);
  const double denom = Denominator(spec, lambda);

  EffectEstimate est;
  est.method = Method::kHDiff;
  est.alpha = alpha;
  est.lambda = lambda;
  est.n = data.size();

  const double p1 = arms.mean_treated();
  const double p0 = arms.mean_control();
  est.tau_hat = (p1 - p0) / denom;

  const double treated = static_cast<double>(arms.treated) / est.n;
  const double v = (p1 * (1.0 - p1) / treated + p0 * (1.0 - p0) / (1.0 - treated)) /
                       (denom * denom) +
                   est.tau_hat * est.tau_hat * (2.0 + LambdaVarianceRatio(lambda));
  FinishEstimate(est, v);
  return est;
}

EffectEstimate EstimateTauHCov(const PrivateDataset& data,
                               const DesignSpec& spec,
                               const CheaterEstimate& lambda,
                               std::span<const double> f1,
                               std::span<const double> f0, double alpha) {
  const std::size_t n = data.size();
  Require(f1.size() == n && f0.size() == n, ErrorCode::kInvalidArgument,
          "working-model predictions must cover every row");
  for (std::size_t i = 0; i < n; ++i) {
    Require(f1[i] >= 0.0 && f1[i] <= 1.0 && f0[i] >= 0.0 && f0[i] <= 1.0,
            ErrorCode::kInvalidArgument,
            "working-model prediction outside [0, 1] at row " + std::to_string(i + 1));
  }
  const ArmMeans arms = CountArms(data.y_tilde(), data.a());
  RequireArms(arms);
  const double denom = Denominator(spec, lambda);
  const double delta = spec.delta();
  const auto y = data.y_tilde();
  const auto a = data.a();

  double sum1 = 0.0, sum0 = 0.0, diff_sq = 0.0, res1 = 0.0, res0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r1 = y[i] - f1[i];
    const double r0 = y[i] - f0[i];
    sum1 += r1 * a[i] / delta + f1[i];
    sum0 += r0 * (1 - a[i]) / (1.0 - delta) + f0[i];
    diff_sq += (f1[i] - f0[i]) * (f1[i] - f0[i]);
    if (a[i]) {
      res1 += r1 * r1;
    } else {
      res0 += r0 * r0;
    }
  }

  EffectEstimate est;
  est.method = Method::kHCov;
  est.alpha = alpha;
  est.lambda = lambda;
  est.n = n;
  est.tau_hat = (sum1 / n - sum0 / n) / denom;
  const double v = (diff_sq / n + res1 / arms.treated / delta +
                    res0 / arms.control / (1.0 - delta)) /
                       (denom * denom) +
                   est.tau_hat * est.tau_hat * (1.0 + LambdaVarianceRatio(lambda));
  FinishEstimate(est, v);
  return est;
}

ClassicalEstimates EstimateClassical(std::span<const std::uint8_t> y,
                                     std::span<const std::uint8_t> a,
                                     std::span<const double> f1,
                                     std::span<const double> f0, double alpha) {
  const std::size_t n = y.size();
  Require(a.size() == n, ErrorCode::kInvalidArgument,
          "outcome and treatment lengths differ");
  Require(f1.size() == f0.size() && (f1.empty() || f1.size() == n),
          ErrorCode::kInvalidArgument, "predictions must cover every row");
  const ArmMeans arms = CountArms(y, a);
  RequireArms(arms);
  const double treated = static_cast<double>(arms.treated) / n;

  ClassicalEstimates out;
  EffectEstimate& diff = out.diff;
  diff.method = Method::kDiff;
  diff.alpha = alpha;
  diff.n = n;
  const double p1 = arms.mean_treated();
  const double p0 = arms.mean_control();
  diff.tau_hat = p1 - p0;
  FinishEstimate(diff, p1 * (1.0 - p1) / treated + p0 * (1.0 - p0) / (1.0 - treated));

  auto pred1 = [&](std::size_t i) { return f1.empty() ? 0.0 : f1[i]; };
  auto pred0 = [&](std::size_t i) { return f0.empty() ? 0.0 : f0[i]; };
  double res1 = 0.0, res0 = 0.0, mean_f1 = 0.0, mean_f0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i]) {
      res1 += y[i] - pred1(i);
    } else {
      res0 += y[i] - pred0(i);
    }
    mean_f1 += pred1(i);
    mean_f0 += pred0(i);
  }
  res1 /= arms.treated;
  res0 /= arms.control;
  mean_f1 /= n;
  mean_f0 /= n;

  EffectEstimate& cov = out.cov;
  cov.method = Method::kCov;
  cov.alpha = alpha;
  cov.n = n;
  cov.tau_hat = (res1 + mean_f1) - (res0 + mean_f0);

  // Influence-function variance of the augmented estimator.
  double var_f = 0.0, var1 = 0.0, var0 = 0.0;
  const double mean_df = mean_f1 - mean_f0;
  for (std::size_t i = 0; i < n; ++i) {
    const double df = pred1(i) - pred0(i) - mean_df;
    var_f += df * df;
    if (a[i]) {
      const double e = y[i] - pred1(i) - res1;
      var1 += e * e;
    } else {
      const double e = y[i] - pred0(i) - res0;
      var0 += e * e;
    }
  }
  FinishEstimate(cov, var_f / n + var1 / arms.treated / treated +
                          var0 / arms.control / (1.0 - treated));
  return out;
}

WaldResult WaldTest(const EffectEstimate& estimate, double tau0) {
  Require(estimate.se_analytic > 0.0, ErrorCode::kDegenerate,
          "Wald test needs a positive standard error");
  WaldResult out;
  out.statistic = (estimate.tau_hat - tau0) / estimate.se_analytic;
  out.p_value = std::erfc(std::abs(out.statistic) / std::sqrt(2.0));
  out.reject = std::abs(out.statistic) > CriticalValue(estimate.alpha);
  return out;
}

// ---------------------------------------------------------------------------

std::string WorkingModelKindName(WorkingModelKind kind) {
  switch (kind) {
    case WorkingModelKind::kAicBackward:
      return "aic";
    case WorkingModelKind::kAicForward:
      return "aic_forward";
    case WorkingModelKind::kAllCovariates:
      return "all";
    case WorkingModelKind::kInterceptOnly:
      return "intercept";
    case WorkingModelKind::kZero:
      return "zero";
  }
  return "unknown";
}

WorkingModelKind ParseWorkingModelKind(const std::string& name) {
  for (WorkingModelKind k :
       {WorkingModelKind::kAicBackward, WorkingModelKind::kAicForward,
        WorkingModelKind::kAllCovariates, WorkingModelKind::kInterceptOnly,
        WorkingModelKind::kZero}) {
    if (WorkingModelKindName(k) == name) return k;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown working model '" + name +
           "' (expected aic, aic_forward, all, intercept or zero)");
}

namespace {

glm::LogisticModel FitArm(const PrivateDataset& arm,
                          const WorkingModelOptions& options) {
  const auto& covariates = arm.covariates();
  std::vector<std::size_t> candidates = options.candidates;
  if (candidates.empty()) {
    candidates.resize(covariates.size());
    std::iota(candidates.begin(), candidates.end(), 0);
  }
  std::vector<bool> mask(covariates.size(), false);
  switch (options.kind) {
    case WorkingModelKind::kAicBackward:
    case WorkingModelKind::kAicForward:
      if (!candidates.empty()) {
        glm::SelectionOptions sel;
        sel.direction = options.kind == WorkingModelKind::kAicBackward
                            ? glm::Direction::kBackward
                            : glm::Direction::kForward;
        sel.missing_indicators = options.missing_indicators;
        sel.fit = WorkingFitOptions();
        return glm::SelectAic(covariates, arm.y_tilde(), candidates, sel);
      }
      break;
    case WorkingModelKind::kAllCovariates:
      for (std::size_t c : candidates) {
        Require(c < mask.size(), ErrorCode::kInvalidArgument,
                "candidate covariate index out of range");
        mask[c] = true;
      }
      break;
    case WorkingModelKind::kInterceptOnly:
    case WorkingModelKind::kZero:
      break;
  }
  return glm::FitModel(covariates, arm.y_tilde(), mask, WorkingFitOptions(),
                       options.missing_indicators);
}

}  // namespace

WorkingModels FitWorkingModels(const PrivateDataset& data,
                               const WorkingModelOptions& options) {
  WorkingModels out;
  out.kind = options.kind;
  if (options.kind == WorkingModelKind::kZero) {
    out.f1.assign(data.size(), 0.0);
    out.f0.assign(data.size(), 0.0);
    return out;
  }
  const auto treated_rows = ArmRows(data, 1);
  const auto control_rows = ArmRows(data, 0);
  Require(!treated_rows.empty() && !control_rows.empty(), ErrorCode::kDegenerate,
          "both treatment arms must be nonempty to fit working models");
  out.treated = FitArm(data.Select(treated_rows), options);
  out.control = FitArm(data.Select(control_rows), options);
  out.f1 = PredictRows(*out.treated, data);
  out.f0 = PredictRows(*out.control, data);
  return out;
}

WorkingModels RefitWorkingModels(const WorkingModels& models,
                                 const PrivateDataset& data) {
  WorkingModels out;
  out.kind = models.kind;
  if (!models.treated || !models.control) {
    out.f1.assign(data.size(), 0.0);
    out.f0.assign(data.size(), 0.0);
    return out;
  }
  const auto treated_rows = ArmRows(data, 1);
  const auto control_rows = ArmRows(data, 0);
  Require(!treated_rows.empty() && !control_rows.empty(), ErrorCode::kDegenerate,
          "both treatment arms must be nonempty to fit working models");
  const PrivateDataset treated = data.Select(treated_rows);
  const PrivateDataset control = data.Select(control_rows);
  out.treated = glm::Refit(*models.treated, treated.covariates(),
                           treated.y_tilde(), WorkingFitOptions());
  out.control = glm::Refit(*models.control, control.covariates(),
                           control.y_tilde(), WorkingFitOptions());
  out.f1 = PredictRows(*out.treated, data);
  out.f0 = PredictRows(*out.control, data);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// A working model reduced to its design rows over the full dataset, so that
// a resample only gathers rows and refits from the original coefficients.
struct RefitDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd start;
};

RefitDesign PrepareRefit(const glm::LogisticModel& model,
                         const std::vector<Covariate>& covariates, std::size_t n) {
  RefitDesign d;
  if (covariates.empty()) {
    d.x = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
  } else {
    d.x = model.encoder.DesignMatrix(covariates, model.included_terms);
  }
  d.start.resize(d.x.cols());
  d.start[0] = model.coefficients[0];
  Eigen::Index k = 1;
  for (std::size_t t = 0; t < model.encoder.term_count(); ++t) {
    if (!model.included_terms[t]) continue;
    for (std::size_t col : model.encoder.term_columns(t)) {
      d.start[k++] = model.coefficients[static_cast<Eigen::Index>(col) + 1];
    }
  }
  return d;
}

// Refits on the resampled rows of one arm and predicts every resampled row.
std::vector<double> RefitPredict(const RefitDesign& design,
                                 std::span<const std::size_t> rows,
                                 std::span<const std::uint8_t> a,
                                 std::span<const std::uint8_t> y, std::uint8_t arm) {
  std::vector<Eigen::Index> fit_rows;
  std::vector<std::uint8_t> fit_y;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (a[rows[i]] != arm) continue;
    fit_rows.push_back(static_cast<Eigen::Index>(rows[i]));
    fit_y.push_back(y[rows[i]]);
  }
  Require(!fit_rows.empty(), ErrorCode::kDegenerate,
          "both treatment arms must be nonempty to fit working models");
  glm::FitOptions options = WorkingFitOptions();
  options.initial = design.start;
  const Eigen::MatrixXd x = design.x(fit_rows, Eigen::all);
  const glm::MatrixFit fit = glm::Fit(x, fit_y, options);
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i] = glm::Logistic(
        design.x.row(static_cast<Eigen::Index>(rows[i])).dot(fit.coefficients));
  }
  return out;
}

}  // namespace

std::vector<BootstrapResult> Bootstrap(const PrivateDataset& data,
                                       const DesignSpec& spec,
                                       std::span<const BootstrapTarget> targets,
                                       const BootstrapOptions& options) {
  Require(options.resamples >= 100, ErrorCode::kInvalidArgument,
          "bootstrap needs at least 100 resamples");
  Require(!targets.empty(), ErrorCode::kInvalidArgument,
          "no bootstrap target requested");
  Require(!data.empty(), ErrorCode::kDegenerate, "dataset is empty");
  const bool need_cov =
      std::find(targets.begin(), targets.end(), BootstrapTarget::kHCov) !=
      targets.end();
  Require(!need_cov || options.models != nullptr, ErrorCode::kInvalidArgument,
          "doubly robust bootstrap needs fitted working models");
  const bool refit = need_cov && options.models->treated && options.models->control;
  std::optional<RefitDesign> design1, design0;
  if (refit) {
    design1 = PrepareRefit(*options.models->treated, data.covariates(), data.size());
    design0 = PrepareRefit(*options.models->control, data.covariates(), data.size());
  }
  // Resamples only need the columns the estimators read.
  const PrivateDataset base(
      std::vector<std::uint8_t>(data.y_tilde().begin(), data.y_tilde().end()),
      std::vector<std::uint8_t>(data.a().begin(), data.a().end()),
      std::vector<std::uint8_t>(data.s().begin(), data.s().end()));
  const std::vector<double> zero(data.size(), 0.0);

  const std::size_t b_count = options.resamples;
  const std::size_t t_count = targets.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values(b_count * t_count, nan);
  std::vector<std::uint8_t> skipped(b_count, 0);
  const RandomStream root(options.seed);
  const std::size_t n = data.size();

  ParallelFor(b_count,
              options.workers ? options.workers : DefaultWorkerCount(),
              [&](std::size_t b) {
                RandomStream rng = root.Substream(b);
                std::vector<std::size_t> rows(n);
                for (auto& r : rows) r = rng.UniformIndex(n);
                const PrivateDataset sample = base.Select(rows, false);
                try {
                  const CheaterEstimate lambda = EstimateLambda(sample, spec);
                  for (std::size_t t = 0; t < t_count; ++t) {
                    double v = 0.0;
                    switch (targets[t]) {
                      case BootstrapTarget::kLambda:
                        v = lambda.lambda_hat;
                        break;
                      case BootstrapTarget::kHDiff:
                        v = EstimateTauHDiff(sample, spec, lambda).tau_hat;
                        break;
                      case BootstrapTarget::kHCov: {
                        if (!refit) {
                          v = EstimateTauHCov(sample, spec, lambda, zero, zero)
                                  .tau_hat;
                          break;
                        }
                        const auto f1 = RefitPredict(*design1, rows, data.a(),
                                                     data.y_tilde(), 1);
                        const auto f0 = RefitPredict(*design0, rows, data.a(),
                                                     data.y_tilde(), 0);
                        v = EstimateTauHCov(sample, spec, lambda, f1, f0).tau_hat;
                        break;
                      }
                    }
                    values[b * t_count + t] = v;
                  }
                } catch (const Error& e) {
                  if (!IsStatisticalFailure(e.code())) throw;
                  skipped[b] = 1;
                }
              });

  const std::size_t skip_count =
      std::accumulate(skipped.begin(), skipped.end(), std::size_t{0});
  if (skip_count > kMaxSkippedFraction * b_count) {
    Fail(ErrorCode::kDegenerate,
         std::to_string(skip_count) + " of " + std::to_string(b_count) +
             " bootstrap resamples were degenerate (more than 1%); the data "
             "are too small or too unbalanced for the bootstrap");
  }

  std::vector<BootstrapResult> out(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    BootstrapResult& r = out[t];
    r.skipped = skip_count;
    for (std::size_t b = 0; b < b_count; ++b) {
      if (!skipped[b]) r.values.push_back(values[b * t_count + t]);
    }
    r.replicates = r.values.size();
    Require(r.replicates >= 2, ErrorCode::kDegenerate,
            "too few usable bootstrap resamples");
    const double mean =
        std::accumulate(r.values.begin(), r.values.end(), 0.0) / r.replicates;
    double ss = 0.0;
    for (double v : r.values) ss += (v - mean) * (v - mean);
    r.se = std::sqrt(ss / (r.replicates - 1));
    r.ci_low = Quantile(r.values, options.alpha / 2.0);
    r.ci_high = Quantile(r.values, 1.0 - options.alpha / 2.0);
  }
  return out;
}

BootstrapResult BootstrapSe(const PrivateDataset& data, const DesignSpec& spec,
                            BootstrapTarget target,
                            const BootstrapOptions& options) {
  const BootstrapTarget targets[] = {target};
  return std::move(Bootstrap(data, spec, targets, options).front());
}

// ---------------------------------------------------------------------------

std::vector<BalanceRow> CovariateBalance(const PrivateDataset& data) {
  std::vector<BalanceRow> rows;
  const auto a = data.a();
  for (const Covariate& c : data.covariates()) {
    std::vector<std::pair<std::string, std::function<double(double)>>> columns;
    if (c.kind == CovariateKind::kCategorical) {
      for (std::size_t level = 0; level < c.levels.size(); ++level) {
        columns.emplace_back(c.name + "=" + c.levels[level], [level](double v) {
          return v == static_cast<double>(level) ? 1.0 : 0.0;
        });
      }
    } else {
      columns.emplace_back(c.name, [](double v) { return v; });
    }
    for (const auto& [label, transform] : columns) {
      double sum[2] = {0, 0}, sq[2] = {0, 0};
      std::size_t observed[2] = {0, 0}, missing[2] = {0, 0};
      for (std::size_t i = 0; i < c.values.size(); ++i) {
        const int arm = a[i] ? 1 : 0;
        if (Covariate::IsMissing(c.values[i])) {
          ++missing[arm];
          continue;
        }
        const double v = transform(c.values[i]);
        ++observed[arm];
        sum[arm] += v;
        sq[arm] += v * v;
      }
      BalanceRow row;
      row.covariate = label;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      double mean[2], var[2];
      for (int arm = 0; arm < 2; ++arm) {
        const double k = static_cast<double>(observed[arm]);
        mean[arm] = observed[arm] ? sum[arm] / k : nan;
        var[arm] = observed[arm] > 1
                       ? std::max(0.0, (sq[arm] - k * mean[arm] * mean[arm]) / (k - 1))
                       : 0.0;
        const std::size_t total = observed[arm] + missing[arm];
        (arm ? row.missing_treated : row.missing_control) =
            total ? static_cast<double>(missing[arm]) / total : 0.0;
      }
      row.mean_treated = mean[1];
      row.mean_control = mean[0];
      const double pooled = std::sqrt((var[0] + var[1]) / 2.0);
      if (observed[0] && observed[1] && pooled > 1e-12) {
        row.smd = (mean[1] - mean[0]) / pooled;
        row.flagged = std::abs(*row.smd) > kBalanceFlagThreshold;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

EstimateReport Analyze(const PrivateDataset& data, const DesignSpec& spec,
                       const std::string& outcome,
                       const EstimateOptions& options) {
  EstimateReport report;
  report.outcome = outcome;
  report.n = data.size();
  report.alpha = options.alpha;
  report.bootstrap_resamples = options.bootstrap;
  report.working_models = WorkingModelKindName(options.models.kind);

  report.lambda = EstimateLambda(data, spec);
  if (report.lambda.boundary_corrected) {
    report.warnings.push_back("cheater proportion moved from raw value " +
                              Fmt(report.lambda.raw_value) +
                              " by the boundary likelihood rule");
  }
  report.hdiff = EstimateTauHDiff(data, spec, report.lambda, options.alpha);
  report.hdiff_wald = WaldTest(report.hdiff);

  const WorkingModels models = FitWorkingModels(data, options.models);
  report.hcov = EstimateTauHCov(data, spec, report.lambda, models.f1, models.f0,
                                options.alpha);
  report.hcov_wald = WaldTest(*report.hcov);
  if (models.treated) {
    report.model_treated = glm::Summarize(*models.treated);
    report.model_control = glm::Summarize(*models.control);
    if (!models.treated->converged || !models.control->converged) {
      report.warnings.push_back(
          "a working model did not converge (possible separation); its "
          "predictions are clamped to [1e-6, 1 - 1e-6]");
    }
  }

  if (options.bootstrap > 0) {
    BootstrapOptions boot;
    boot.resamples = options.bootstrap;
    boot.seed = options.seed;
    boot.alpha = options.alpha;
    boot.workers = options.workers;
    boot.models = &models;
    const BootstrapTarget targets[] = {BootstrapTarget::kLambda,
                                       BootstrapTarget::kHDiff,
                                       BootstrapTarget::kHCov};
    auto results = Bootstrap(data, spec, targets, boot);
    report.lambda_se_bootstrap = results[0].se;
    report.hdiff.se_bootstrap = results[1].se;
    report.hcov->se_bootstrap = results[2].se;
    if (results[0].skipped > 0) {
      report.warnings.push_back(std::to_string(results[0].skipped) +
                                " degenerate bootstrap resamples skipped");
    }
    // Replicate values are not part of the report.
    for (auto& r : results) r.values.clear();
    report.hdiff_bootstrap = std::move(results[1]);
    report.hcov_bootstrap = std::move(results[2]);
  }

  for (const auto* est : {&report.hdiff, &*report.hcov}) {
    for (const auto& w : est->warnings) {
      if (std::find(report.warnings.begin(), report.warnings.end(), w) ==
          report.warnings.end()) {
        report.warnings.push_back(w);
      }
    }
  }
  if (data.has_covariates()) report.balance = CovariateBalance(data);
  return report;
}

}  // namespace rprct
