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

#include "rprct/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "rprct/status.hpp"

namespace rprct::glm {

namespace {

constexpr double kClampLow = 1e-6;
constexpr double kClampHigh = 1.0 - 1e-6;
constexpr int kMaxHalvings = 60;
constexpr double kLikelihoodSlack = 1e-12;
// |eta| beyond which a fitted probability is within 1e-13 of 0 or 1.
constexpr double kSaturatedEta = 30.0;

// log(1 + e^eta) without overflow.
double Softplus(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double LogLikelihoodFromEta(const Eigen::VectorXd& eta,
                            std::span<const std::uint8_t> y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += y[i] * eta[i] - Softplus(eta[i]);
  }
  return ll;
}

int Rank(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

// Columns kept when scanning left to right and dropping any column that does
// not raise the rank.
std::vector<bool> IndependentColumns(const Eigen::MatrixXd& x) {
  std::vector<bool> keep(x.cols(), false);
  std::vector<Eigen::Index> kept;
  int rank = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::MatrixXd trial(x.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
    for (std::size_t k = 0; k < kept.size(); ++k) trial.col(k) = x.col(kept[k]);
    trial.col(trial.cols() - 1) = x.col(j);
    const int r = Rank(trial);
    if (r > rank) {
      rank = r;
      kept.push_back(j);
      keep[j] = true;
    }
  }
  return keep;
}

}  // namespace

int MatrixFit::estimated_parameters() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

double LogLikelihood(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y,
                     const Eigen::VectorXd& beta) {
  return LogLikelihoodFromEta(x * beta, y);
}

Eigen::VectorXd Score(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y,
                      const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd residual(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    residual[i] = y[i] - Logistic(eta[i]);
  }
  return x.transpose() * residual;
}

MatrixFit Fit(const Eigen::MatrixXd& x_full, std::span<const std::uint8_t> y,
              const FitOptions& options) {
  const Eigen::Index n = x_full.rows();
  const Eigen::Index p = x_full.cols();
  Require(static_cast<std::size_t>(n) == y.size(), ErrorCode::kInvalidArgument,
          "design matrix and response lengths differ");
  Require(p >= 1 && n >= p, ErrorCode::kInvalidArgument,
          "logistic fit needs at least as many rows as columns");
  for (auto v : y) {
    Require(v <= 1, ErrorCode::kInvalidArgument, "response must be 0/1");
  }

  MatrixFit fit;
  fit.active.assign(p, true);
  if (Rank(x_full) < p) {
    if (!options.drop_dependent_columns) {
      Fail(ErrorCode::kRankDeficient,
           "design matrix is rank deficient; enable column dropping or remove "
           "collinear covariates");
    }
    fit.active = IndependentColumns(x_full);
  }

  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (fit.active[j]) cols.push_back(j);
  }
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) x.col(k) = x_full.col(cols[k]);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  if (options.initial.size() == p) {
    for (std::size_t k = 0; k < cols.size(); ++k) beta[k] = options.initial[cols[k]];
  }
  Eigen::VectorXd eta = x * beta;
  double ll = LogLikelihoodFromEta(eta, y);
  fit.likelihood_trace.push_back(ll);

  Eigen::VectorXd mu(n), w(n), residual(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = Logistic(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
      residual[i] = y[i] - mu[i];
    }
    const Eigen::VectorXd score = x.transpose() * residual;
    fit.score_max_norm = score.cwiseAbs().maxCoeff();
    if (fit.score_max_norm < options.score_tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) break;

    // Step halving keeps the log-likelihood non-decreasing up to summation
    // rounding, which near the optimum is larger than the Newton gain.
    const double slack = kLikelihoodSlack * std::max(1.0, std::abs(ll));
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
      const Eigen::VectorXd candidate = beta + t * step;
      const Eigen::VectorXd candidate_eta = x * candidate;
      const double candidate_ll = LogLikelihoodFromEta(candidate_eta, y);
      if (candidate_ll >= ll - slack) {
        beta = candidate;
        eta = candidate_eta;
        ll = candidate_ll;
        accepted = true;
        break;
      }
    }
    fit.iterations = iter + 1;
    if (!accepted) break;
    fit.likelihood_trace.push_back(ll);
    if (beta.norm() > options.divergence_norm) {
      fit.separated = true;
      break;
    }
  }
  if (!fit.converged && !fit.separated) {
    // Final score check after the last accepted step.
    for (Eigen::Index i = 0; i < n; ++i) residual[i] = y[i] - Logistic(eta[i]);
    fit.score_max_norm = (x.transpose() * residual).cwiseAbs().maxCoeff();
    fit.converged = fit.score_max_norm < options.score_tolerance;
  }
  // Under separation the score can vanish numerically before the norm check
  // fires; fitted probabilities saturated at 0 or 1 give it away.
  if (fit.converged && eta.cwiseAbs().maxCoeff() > kSaturatedEta) {
    fit.converged = false;
    fit.separated = true;
  }

  fit.coefficients = Eigen::VectorXd::Zero(p);
  for (std::size_t k = 0; k < cols.size(); ++k) fit.coefficients[cols[k]] = beta[k];
  fit.log_likelihood = ll;
  fit.aic = Aic(fit.estimated_parameters(), ll);
  return fit;
}

// ---------------------------------------------------------------------------

CovariateEncoder::CovariateEncoder(const std::vector<Covariate>& training,
                                   bool missing_indicators)
    : missing_indicators_(missing_indicators) {
  for (std::size_t j = 0; j < training.size(); ++j) {
    const Covariate& c = training[j];
    Term term{c.name, j, c.kind, c.levels, {}, false};
    auto add_column = [&](std::string name, double mean) {
      term.columns.push_back(column_names_.size());
      column_names_.push_back(std::move(name));
      means_.push_back(mean);
    };

    std::size_t observed = 0;
    for (double v : c.values) observed += !Covariate::IsMissing(v);

    if (c.kind == CovariateKind::kCategorical) {
      for (std::size_t level = 1; level < c.levels.size(); ++level) {
        double count = 0.0;
        for (double v : c.values) {
          if (!Covariate::IsMissing(v) && v == static_cast<double>(level)) ++count;
        }
        add_column(c.name + "=" + c.levels[level],
                   observed ? count / observed : 0.0);
      }
    } else {
      double sum = 0.0;
      for (double v : c.values) {
        if (!Covariate::IsMissing(v)) sum += v;
      }
      add_column(c.name, observed ? sum / observed : 0.0);
    }
    if (missing_indicators && observed < c.values.size()) {
      term.has_indicator = true;
      add_column(c.name + ":missing", 0.0);
    }
    terms_.push_back(std::move(term));
  }
}

void CovariateEncoder::EncodeRow(const std::vector<Covariate>& covariates,
                                 std::size_t row, std::span<double> out) const {
  for (const Term& term : terms_) {
    const double v = covariates[term.source].values[row];
    bool missing = Covariate::IsMissing(v);
    std::size_t k = 0;
    if (term.kind == CovariateKind::kCategorical) {
      const auto levels = term.levels.size();
      if (!missing && (v < 0 || v >= static_cast<double>(levels))) missing = true;
      for (std::size_t level = 1; level < levels; ++level, ++k) {
        const std::size_t col = term.columns[k];
        out[col] = missing ? means_[col] : (v == static_cast<double>(level) ? 1.0 : 0.0);
      }
    } else {
      const std::size_t col = term.columns[k++];
      out[col] = missing ? means_[col] : v;
    }
    if (term.has_indicator) out[term.columns[k]] = missing ? 1.0 : 0.0;
  }
}

Eigen::MatrixXd CovariateEncoder::DesignMatrix(
    const std::vector<Covariate>& covariates,
    const std::vector<bool>& included_terms) const {
  const std::size_t n = covariates.empty() ? 0 : covariates.front().values.size();
  std::vector<std::size_t> cols;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    if (included_terms.empty() || included_terms[t]) {
      cols.insert(cols.end(), terms_[t].columns.begin(), terms_[t].columns.end());
    }
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(cols.size()) + 1);
  std::vector<double> buffer(column_names_.size());
  for (std::size_t i = 0; i < n; ++i) {
    EncodeRow(covariates, i, buffer);
    x(i, 0) = 1.0;
    for (std::size_t k = 0; k < cols.size(); ++k) x(i, k + 1) = buffer[cols[k]];
  }
  return x;
}

// ---------------------------------------------------------------------------

std::vector<std::string> LogisticModel::coefficient_names() const {
  std::vector<std::string> names{"(intercept)"};
  names.insert(names.end(), encoder.column_names().begin(),
               encoder.column_names().end());
  return names;
}

ModelSummary Summarize(const LogisticModel& model) {
  ModelSummary s;
  for (std::size_t t = 0; t < model.included_terms.size(); ++t) {
    if (model.included_terms[t]) s.terms.push_back(model.encoder.term_name(t));
  }
  s.coefficient_names = model.coefficient_names();
  s.coefficients.assign(model.coefficients.data(),
                        model.coefficients.data() + model.coefficients.size());
  s.converged = model.converged;
  s.log_likelihood = model.log_likelihood;
  s.aic = model.aic;
  s.aic_path = model.aic_path;
  return s;
}

namespace {

LogisticModel FitWithEncoder(CovariateEncoder encoder,
                             const std::vector<Covariate>& covariates,
                             std::span<const std::uint8_t> y,
                             std::vector<bool> included,
                             const FitOptions& options) {
  if (included.empty()) included.assign(encoder.term_count(), true);
  Require(included.size() == encoder.term_count(), ErrorCode::kInvalidArgument,
          "included-term mask has the wrong length");
  Eigen::MatrixXd x;
  if (covariates.empty()) {
    x = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(y.size()), 1);
  } else {
    x = encoder.DesignMatrix(covariates, included);
  }
  const MatrixFit fit = Fit(x, y, options);

  LogisticModel model;
  model.coefficients = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(encoder.column_count()) + 1);
  model.coefficients[0] = fit.coefficients[0];
  Eigen::Index k = 1;
  for (std::size_t t = 0; t < encoder.term_count(); ++t) {
    if (!included[t]) continue;
    for (std::size_t col : encoder.term_columns(t)) {
      model.coefficients[static_cast<Eigen::Index>(col) + 1] = fit.coefficients[k++];
    }
  }
  model.encoder = std::move(encoder);
  model.included_terms = std::move(included);
  model.converged = fit.converged;
  model.log_likelihood = fit.log_likelihood;
  model.parameters = fit.estimated_parameters();
  model.aic = fit.aic;
  return model;
}

}  // namespace

LogisticModel FitModel(const std::vector<Covariate>& covariates,
                       std::span<const std::uint8_t> y,
                       std::vector<bool> included_terms,
                       const FitOptions& options, bool missing_indicators) {
  return FitWithEncoder(CovariateEncoder(covariates, missing_indicators),
                        covariates, y, std::move(included_terms), options);
}

LogisticModel Refit(const LogisticModel& model,
                    const std::vector<Covariate>& covariates,
                    std::span<const std::uint8_t> y, const FitOptions& options) {
  LogisticModel refit = FitWithEncoder(model.encoder, covariates, y,
                                       model.included_terms, options);
  refit.aic_path = model.aic_path;
  return refit;
}

LogisticModel SelectAic(const std::vector<Covariate>& covariates,
                        std::span<const std::uint8_t> y,
                        const std::vector<std::size_t>& candidates,
                        const SelectionOptions& options) {
  Require(!candidates.empty(), ErrorCode::kInvalidArgument,
          "AIC selection needs at least one candidate covariate");
  const CovariateEncoder encoder(covariates, options.missing_indicators);
  for (std::size_t c : candidates) {
    Require(c < encoder.term_count(), ErrorCode::kInvalidArgument,
            "candidate covariate index out of range");
  }
  std::vector<std::size_t> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<bool> current(encoder.term_count(), false);
  if (options.direction == Direction::kBackward) {
    for (std::size_t c : sorted) current[c] = true;
  }
  LogisticModel best = FitWithEncoder(encoder, covariates, y, current, options.fit);
  std::vector<AicStep> path{{"start", best.aic}};

  while (true) {
    std::optional<LogisticModel> candidate_best;
    std::size_t chosen = 0;
    for (std::size_t c : sorted) {
      const bool backward = options.direction == Direction::kBackward;
      if (current[c] != backward) continue;
      std::vector<bool> trial = current;
      trial[c] = !backward;
      LogisticModel m = FitWithEncoder(encoder, covariates, y, trial, options.fit);
      if (!candidate_best || m.aic < candidate_best->aic) {
        candidate_best = std::move(m);
        chosen = c;
      }
    }
    if (!candidate_best || !(candidate_best->aic < best.aic)) break;
    current[chosen] = options.direction == Direction::kForward;
    best = std::move(*candidate_best);
    path.push_back(
        {std::string(options.direction == Direction::kBackward ? "drop " : "add ") +
             encoder.term_name(chosen),
         best.aic});
  }
  best.aic_path = std::move(path);
  return best;
}

double Predict(const LogisticModel& model,
               const std::vector<Covariate>& covariates, std::size_t row) {
  double eta = model.coefficients[0];
  if (model.encoder.column_count() > 0) {
    std::vector<double> buffer(model.encoder.column_count());
    model.encoder.EncodeRow(covariates, row, buffer);
    for (std::size_t k = 0; k < buffer.size(); ++k) {
      eta += model.coefficients[static_cast<Eigen::Index>(k) + 1] * buffer[k];
    }
  }
  const double p = Logistic(eta);
  return model.converged ? p : std::clamp(p, kClampLow, kClampHigh);
}

std::vector<double> PredictAll(const LogisticModel& model,
                               const std::vector<Covariate>& covariates) {
  Require(!covariates.empty() || model.encoder.column_count() == 0,
          ErrorCode::kInvalidArgument, "model needs covariates to predict");
  const std::size_t n = covariates.empty() ? 0 : covariates.front().values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = Predict(model, covariates, i);
  return out;
}

}  // namespace rprct::glm
