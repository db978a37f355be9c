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

#include "rprct/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rprct/glm.hpp"
#include "rprct/parallel.hpp"
#include "rprct/status.hpp"

namespace rprct {

namespace {

constexpr const char* kBehaviorNames[kBehaviorCount] = {
    "always_zero",    "always_one",           "flip_truth",
    "uniform_random", "prompt_forced_only",   "treatment_dependent"};


double DrawCovariate(const CovariateGenerator& g, RandomStream& rng) {
  switch (g.kind) {
    case GeneratorKind::kBernoulli:
      return rng.Bernoulli(g.p) ? 1.0 : 0.0;
    case GeneratorKind::kCategorical: {
      const double u = rng.Uniform();
      double acc = 0.0;
      for (std::size_t k = 0; k < g.probabilities.size(); ++k) {
        acc += g.probabilities[k];
        if (u < acc) return static_cast<double>(k);
      }
      return static_cast<double>(g.probabilities.size() - 1);
    }
    case GeneratorKind::kUniform:
      return g.min + (g.max - g.min) * rng.Uniform();
    case GeneratorKind::kGaussian:
      return g.mean + g.sd * rng.Normal();
  }
  return 0.0;
}

CovariateKind KindFor(const CovariateGenerator& g) {
  switch (g.kind) {
    case GeneratorKind::kBernoulli:
      return CovariateKind::kBinary;
    case GeneratorKind::kCategorical:
      return CovariateKind::kCategorical;
    default:
      return CovariateKind::kNumeric;
  }
}

// Per-replicate record, merged in index order.
struct ReplicateRecord {
  double true_tau_h = 0.0;
  double true_ate = 0.0;
  double true_lambda = 0.0;
  bool lambda_ok = false;
  CheaterEstimate lambda;
  struct PerMethod {
    bool ok = false;
    double tau_hat = 0.0;
    double se = 0.0;
    bool covered = false;
    std::optional<double> se_bootstrap;
    std::optional<bool> covered_bootstrap;
    double p_value = 1.0;
    bool reject = false;
  };
  std::vector<PerMethod> methods;
};

double Mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double SampleVariance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / (v.size() - 1);
}

}  // namespace

std::string BehaviorName(CheaterBehavior behavior) {
  return kBehaviorNames[static_cast<std::size_t>(behavior)];
}

CheaterBehavior ParseBehavior(const std::string& name) {
  for (std::size_t k = 0; k < kBehaviorCount; ++k) {
    if (name == kBehaviorNames[k]) return static_cast<CheaterBehavior>(k);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown cheater behavior '" + name + "'");
}

std::uint8_t CheaterResponse(CheaterBehavior behavior, std::uint8_t y,
                             Prompt prompt, std::uint8_t a, RandomStream& rng) {
  switch (behavior) {
    case CheaterBehavior::kAlwaysZero:
      return 0;
    case CheaterBehavior::kAlwaysOne:
      return 1;
    case CheaterBehavior::kFlipTruth:
      return 1 - y;
    case CheaterBehavior::kUniformRandom:
      return rng.Bernoulli(0.5) ? 1 : 0;
    case CheaterBehavior::kPromptCompliantForcedOnly:
      return prompt == Prompt::kReportTruth ? 1 - y : Privatize(y, prompt);
    case CheaterBehavior::kTreatmentDependent:
      return a;
  }
  return 0;
}

void PopulationConfig::Validate() const {
  auto bad = [](const std::string& msg) { Fail(ErrorCode::kInvalidArgument, msg); };
  if (n < 1) bad("population size n must be at least 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    bad("lambda must lie in [0, 1): not everyone may be a cheater");
  }
  double mix = 0.0;
  for (double w : behavior_mix) {
    if (!(w >= 0.0)) bad("behavior mix weights must be nonnegative");
    mix += w;
  }
  if (std::abs(mix - 1.0) > 1e-9) bad("behavior mix must sum to 1");
  if (!std::isfinite(cheater_tilt)) bad("cheater_tilt must be finite");
  for (const auto& g : covariates) {
    const std::string where = "covariate '" + g.name + "': ";
    if (g.name.empty()) bad("covariate generators need a name");
    if (!(g.missing_rate >= 0.0 && g.missing_rate < 1.0)) {
      bad(where + "missing_rate must lie in [0, 1)");
    }
    switch (g.kind) {
      case GeneratorKind::kBernoulli:
        if (!(g.p >= 0.0 && g.p <= 1.0)) bad(where + "p must lie in [0, 1]");
        break;
      case GeneratorKind::kCategorical: {
        if (g.probabilities.size() < 2) bad(where + "needs at least two levels");
        double s = 0.0;
        for (double p : g.probabilities) {
          if (!(p >= 0.0)) bad(where + "probabilities must be nonnegative");
          s += p;
        }
        if (std::abs(s - 1.0) > 1e-9) bad(where + "probabilities must sum to 1");
        break;
      }
      case GeneratorKind::kUniform:
        if (!(g.min < g.max)) bad(where + "min must be below max");
        break;
      case GeneratorKind::kGaussian:
        if (!(g.sd >= 0.0) || !std::isfinite(g.mean)) bad(where + "invalid mean/sd");
        break;
    }
  }
  if (!outcome.coefficients.empty()) {
    if (outcome.coefficients.size() != covariates.size()) {
      bad("outcome coefficients must have one entry per covariate");
    }
    for (std::size_t j = 0; j < covariates.size(); ++j) {
      const std::size_t want = covariates[j].kind == GeneratorKind::kCategorical
                                   ? covariates[j].probabilities.size()
                                   : 1;
      if (outcome.coefficients[j].size() != want) {
        bad("outcome coefficients for '" + covariates[j].name + "' need " +
            std::to_string(want) + " value(s)");
      }
    }
  }
  if (!std::isfinite(outcome.intercept) || !std::isfinite(outcome.treatment_shift)) {
    bad("outcome intercept and treatment shift must be finite");
  }
}

Population GeneratePopulation(const PopulationConfig& config, RandomStream& rng) {
  config.Validate();
  const std::size_t n = config.n;
  const std::size_t k = config.covariates.size();
  Population pop;
  pop.covariates.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& g = config.covariates[j];
    Covariate& c = pop.covariates[j];
    c.name = g.name;
    c.kind = KindFor(g);
    if (g.kind == GeneratorKind::kCategorical) {
      for (std::size_t l = 0; l < g.probabilities.size(); ++l) {
        c.levels.push_back(std::to_string(l));
      }
    }
    c.values.resize(n);
  }
  pop.y1.resize(n);
  pop.y0.resize(n);
  pop.cheater.resize(n);
  pop.behavior.resize(n);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    double eta = config.outcome.intercept;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& g = config.covariates[j];
      const double x = DrawCovariate(g, rng);
      const bool missing = rng.Uniform() < g.missing_rate;
      pop.covariates[j].values[i] = missing ? nan : x;
      if (!config.outcome.coefficients.empty()) {
        const auto& beta = config.outcome.coefficients[j];
        eta += g.kind == GeneratorKind::kCategorical
                   ? beta[static_cast<std::size_t>(x)]
                   : beta[0] * x;
      }
    }
    pop.y0[i] = rng.Bernoulli(glm::Logistic(eta)) ? 1 : 0;
    pop.y1[i] = rng.Bernoulli(glm::Logistic(eta + config.outcome.treatment_shift)) ? 1 : 0;
    double p_cheat = config.lambda;
    if (!config.cheater_independent) {
      p_cheat = std::clamp(config.lambda + config.cheater_tilt * (pop.y0[i] - 0.5),
                           0.0, 1.0);
    }
    pop.cheater[i] = rng.Bernoulli(p_cheat) ? 1 : 0;
    const double u = rng.Uniform();
    double acc = 0.0;
    std::size_t b = kBehaviorCount - 1;
    for (std::size_t m = 0; m < kBehaviorCount; ++m) {
      acc += config.behavior_mix[m];
      if (u < acc) {
        b = m;
        break;
      }
    }
    // Guard against a zero-weight tail picked through rounding.
    while (config.behavior_mix[b] == 0.0 && b > 0) --b;
    pop.behavior[i] = static_cast<CheaterBehavior>(b);
  }
  return pop;
}

ProtocolOutput RunProtocol(const Population& population, const DesignSpec& spec,
                           RandomStream& rng) {
  const std::size_t n = population.size();
  TruthSidecar truth;
  truth.ids.resize(n);
  truth.y1 = population.y1;
  truth.y0 = population.y0;
  truth.cheater = population.cheater;
  truth.behavior = population.behavior;
  truth.prompt.resize(n);
  truth.s.resize(n);
  truth.a.resize(n);
  std::vector<std::uint8_t> y_tilde(n);

  for (std::size_t i = 0; i < n; ++i) {
    truth.ids[i] = std::to_string(i + 1);
    const std::uint8_t s = rng.Bernoulli(0.5) ? 1 : 2;
    const std::uint8_t a = rng.Bernoulli(spec.delta()) ? 1 : 0;
    const Prompt prompt = SamplePrompt(spec.frr(s), rng);
    truth.s[i] = s;
    truth.a[i] = a;
    truth.prompt[i] = prompt;
    const std::uint8_t y = truth.observed_y(i);
    y_tilde[i] = population.cheater[i]
                     ? CheaterResponse(population.behavior[i], y, prompt, a, rng)
                     : Privatize(y, prompt);
  }
  PrivateDataset data(std::move(y_tilde), truth.a, truth.s, population.covariates,
                      truth.ids);
  return {std::move(data), std::move(truth)};
}

double TrueTauH(const TruthSidecar& truth) {
  double sum = 0.0;
  std::size_t honest = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth.cheater[i]) continue;
    ++honest;
    sum += static_cast<double>(truth.y1[i]) - truth.y0[i];
  }
  Require(honest > 0, ErrorCode::kDegenerate,
          "every unit is a cheater; the honest effect is undefined");
  return sum / honest;
}

double TrueLambda(const TruthSidecar& truth) {
  Require(truth.size() > 0, ErrorCode::kDegenerate, "empty sidecar");
  const auto c = std::accumulate(truth.cheater.begin(), truth.cheater.end(),
                                 std::size_t{0});
  return static_cast<double>(c) / truth.size();
}

const MethodSummary& MonteCarloSummary::For(Method method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  Fail(ErrorCode::kInvalidArgument,
       "method " + MethodName(method) + " was not part of the run");
}

MonteCarloSummary Replicate(const PopulationConfig& config,
                            const DesignSpec& spec, std::size_t reps,
                            std::uint64_t seed, const ReplicateOptions& options) {
  Require(reps >= 1, ErrorCode::kInvalidArgument, "reps must be at least 1");
  Require(!options.methods.empty(), ErrorCode::kInvalidArgument,
          "no estimator selected");
  config.Validate();
  const double z = CriticalValue(options.alpha);
  const std::size_t m_count = options.methods.size();
  const RandomStream root(seed);
  std::vector<ReplicateRecord> records(reps);

  ParallelFor(reps, options.workers ? options.workers : DefaultWorkerCount(),
              [&](std::size_t r) {
    const RandomStream stream = root.Substream(r);
    RandomStream pop_rng = stream.Substream("population");
    RandomStream protocol_rng = stream.Substream("protocol");
    const Population pop = GeneratePopulation(config, pop_rng);
    const ProtocolOutput out = RunProtocol(pop, spec, protocol_rng);
    const PrivateDataset& data = out.data;
    ReplicateRecord& rec = records[r];
    rec.methods.resize(m_count);
    rec.true_tau_h = TrueTauH(out.truth);
    rec.true_lambda = TrueLambda(out.truth);
    double ate = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      ate += static_cast<double>(pop.y1[i]) - pop.y0[i];
    }
    rec.true_ate = ate / pop.size();

    try {
      rec.lambda = options.known_lambda ? CheaterEstimate::Known(*options.known_lambda)
                                        : EstimateLambda(data, spec);
      rec.lambda_ok = true;
    } catch (const Error& e) {
      if (!IsStatisticalFailure(e.code())) throw;
    }

    std::vector<std::uint8_t> y_true(pop.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) y_true[i] = out.truth.observed_y(i);

    for (std::size_t k = 0; k < m_count; ++k) {
      const Method method = options.methods[k];
      auto& pm = rec.methods[k];
      const bool honest_method = method == Method::kHDiff || method == Method::kHCov;
      if (honest_method && !rec.lambda_ok) continue;
      const double truth = honest_method ? rec.true_tau_h : rec.true_ate;
      try {
        EffectEstimate est;
        std::optional<WorkingModels> models;
        switch (method) {
          case Method::kHDiff:
            est = EstimateTauHDiff(data, spec, rec.lambda, options.alpha);
            break;
          case Method::kHCov:
            models = FitWorkingModels(data, options.models);
            est = EstimateTauHCov(data, spec, rec.lambda, models->f1, models->f0,
                                  options.alpha);
            break;
          case Method::kDiff:
            est = EstimateClassical(y_true, data.a(), {}, {}, options.alpha).diff;
            break;
          case Method::kCov: {
            const PrivateDataset truth_data(y_true, std::vector<std::uint8_t>(
                                                        data.a().begin(), data.a().end()),
                                            std::vector<std::uint8_t>(
                                                data.s().begin(), data.s().end()),
                                            data.covariates());
            const WorkingModels wm = FitWorkingModels(truth_data, options.models);
            est = EstimateClassical(y_true, data.a(), wm.f1, wm.f0, options.alpha).cov;
            break;
          }
        }
        pm.tau_hat = est.tau_hat;
        pm.se = est.se_analytic;
        pm.covered = std::abs(est.tau_hat - truth) <= z * est.se_analytic;
        const WaldResult wald = WaldTest(est);
        pm.p_value = wald.p_value;
        pm.reject = wald.reject;
        if (options.bootstrap > 0 && honest_method && !options.known_lambda) {
          BootstrapOptions boot;
          boot.resamples = options.bootstrap;
          boot.seed = stream.Substream("bootstrap").key();
          boot.alpha = options.alpha;
          boot.workers = 1;
          boot.models = models ? &*models : nullptr;
          const BootstrapResult b = BootstrapSe(
              data, spec,
              method == Method::kHDiff ? BootstrapTarget::kHDiff : BootstrapTarget::kHCov,
              boot);
          pm.se_bootstrap = b.se;
          pm.covered_bootstrap = b.ci_low <= truth && truth <= b.ci_high;
        }
        pm.ok = true;
      } catch (const Error& e) {
        if (!IsStatisticalFailure(e.code())) throw;
      }
    }
  });

  MonteCarloSummary summary;
  summary.replicates = reps;
  summary.seed = seed;
  std::vector<double> tau_h, lambda_true, lambda_hat, lambda_raw;
  std::size_t corrected = 0;
  for (const auto& rec : records) {
    tau_h.push_back(rec.true_tau_h);
    lambda_true.push_back(rec.true_lambda);
    if (rec.lambda_ok) {
      lambda_hat.push_back(rec.lambda.lambda_hat);
      lambda_raw.push_back(rec.lambda.raw_value);
      corrected += rec.lambda.boundary_corrected;
    }
  }
  summary.true_tau_h_mean = Mean(tau_h);
  summary.lambda.truth_mean = Mean(lambda_true);
  summary.lambda.mean = Mean(lambda_hat);
  summary.lambda.raw_mean = Mean(lambda_raw);
  summary.lambda.variance = SampleVariance(lambda_hat);
  summary.lambda.corrected_fraction =
      lambda_hat.empty() ? 0.0 : static_cast<double>(corrected) / lambda_hat.size();

  for (std::size_t k = 0; k < m_count; ++k) {
    const Method method = options.methods[k];
    const bool honest_method = method == Method::kHDiff || method == Method::kHCov;
    MethodSummary ms;
    ms.method = method;
    std::vector<double> values, truths, ses, se_boot, p_values;
    std::size_t covered = 0, covered_boot = 0, boot_count = 0, rejected = 0;
    double se_sq = 0.0;
    for (const auto& rec : records) {
      const auto& pm = rec.methods[k];
      if (!pm.ok) {
        ++ms.failures;
        continue;
      }
      values.push_back(pm.tau_hat);
      truths.push_back(honest_method ? rec.true_tau_h : rec.true_ate);
      ses.push_back(pm.se);
      se_sq += pm.se * pm.se;
      p_values.push_back(pm.p_value);
      covered += pm.covered;
      rejected += pm.reject;
      if (pm.se_bootstrap) {
        ++boot_count;
        se_boot.push_back(*pm.se_bootstrap);
        covered_boot += *pm.covered_bootstrap;
      }
    }
    ms.replicates = values.size();
    if (ms.replicates > 0) {
      const double count = static_cast<double>(ms.replicates);
      ms.mean = Mean(values);
      ms.truth_mean = Mean(truths);
      ms.bias = ms.mean - ms.truth_mean;
      ms.variance = SampleVariance(values);
      ms.coverage = covered / count;
      ms.mean_se_analytic = Mean(ses);
      ms.mean_analytic_variance = se_sq / count;
      ms.rejection_rate = rejected / count;
      if (boot_count > 0) {
        ms.coverage_bootstrap = static_cast<double>(covered_boot) / boot_count;
        ms.mean_se_bootstrap = Mean(se_boot);
      }
    }
    if (options.keep_values) {
      ms.values = std::move(values);
      ms.p_values = std::move(p_values);
    }
    summary.methods.push_back(std::move(ms));
  }
  return summary;
}

std::string GridKindName(GridKind kind) {
  return kind == GridKind::kEffect ? "effect" : "epsilon";
}

std::vector<PowerPoint> PowerGrid(const PopulationConfig& config,
                                  const DesignSpec& spec, GridKind kind,
                                  const std::vector<double>& values, double gap,
                                  std::size_t reps, std::uint64_t seed,
                                  const ReplicateOptions& options) {
  Require(!values.empty(), ErrorCode::kInvalidArgument, "grid has no values");
  std::vector<PowerPoint> out;
  for (double v : values) {
    PopulationConfig cfg = config;
    std::optional<DesignSpec> point_spec;
    if (kind == GridKind::kEffect) {
      cfg.outcome.treatment_shift = v;
      point_spec = spec;
    } else {
      // gap <= 0: a third of r + r' at each grid point.
      const double point_gap = gap > 0 ? gap : 2.0 / (3.0 * (std::exp(v) + 1.0));
      const auto [r, r_prime] = SolveFrrForEpsilon(v, point_gap);
      point_spec.emplace(spec.delta(), FrrParams::Symmetric(r),
                         FrrParams::Symmetric(r_prime));
    }
    // Every grid point reuses the seed (common random numbers).
    out.push_back({v, *point_spec, Replicate(cfg, *point_spec, reps, seed, options)});
  }
  return out;
}

}  // namespace rprct
