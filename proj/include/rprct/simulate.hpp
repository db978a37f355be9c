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

// Synthetic populations with latent potential outcomes and cheaters, the
// RP-RCT protocol (split, FRR prompt, treatment), and a Monte Carlo harness.

#ifndef RPRCT_SIMULATE_HPP_
#define RPRCT_SIMULATE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rprct/dataset.hpp"
#include "rprct/design.hpp"
#include "rprct/estimate.hpp"
#include "rprct/mechanism.hpp"
#include "rprct/random.hpp"

namespace rprct {

enum class CheaterBehavior : std::uint8_t {
  kAlwaysZero = 0,
  kAlwaysOne,
  kFlipTruth,                  // reports 1 - Y
  kUniformRandom,              // fair coin
  kPromptCompliantForcedOnly,  // obeys forced prompts, 1 - Y otherwise
  kTreatmentDependent,         // reports A (breaks cheater/treatment independence)
};

inline constexpr std::size_t kBehaviorCount = 6;

std::string BehaviorName(CheaterBehavior behavior);
CheaterBehavior ParseBehavior(const std::string& name);

// Response a cheater gives. `coin` is only consumed by kUniformRandom.
std::uint8_t CheaterResponse(CheaterBehavior behavior, std::uint8_t y,
                             Prompt prompt, std::uint8_t a, RandomStream& rng);

enum class GeneratorKind { kBernoulli, kCategorical, kUniform, kGaussian };

struct CovariateGenerator {
  std::string name;
  GeneratorKind kind = GeneratorKind::kGaussian;
  double p = 0.5;                    // Bernoulli
  std::vector<double> probabilities; // categorical
  double min = 0.0, max = 1.0;       // uniform
  double mean = 0.0, sd = 1.0;       // Gaussian
  double missing_rate = 0.0;
};

// logit Pr(Y(0) = 1 | x) = intercept + sum_j beta_j x_j;
// logit Pr(Y(1) = 1 | x) adds treatment_shift. Categorical covariates take one
// coefficient per level (first level conventionally 0).
struct OutcomeModel {
  double intercept = 0.0;
  double treatment_shift = 0.0;
  std::vector<std::vector<double>> coefficients;  // per covariate generator
};

struct PopulationConfig {
  std::size_t n = 1000;
  double lambda = 0.0;
  std::vector<CovariateGenerator> covariates;
  OutcomeModel outcome;
  std::array<double, kBehaviorCount> behavior_mix{1.0, 0, 0, 0, 0, 0};
  // When false, Pr(C = 1) = clamp(lambda + cheater_tilt * (Y(0) - 1/2)).
  bool cheater_independent = true;
  double cheater_tilt = 0.0;

  void Validate() const;
};

struct Population {
  std::vector<Covariate> covariates;
  std::vector<std::uint8_t> y1;
  std::vector<std::uint8_t> y0;
  std::vector<std::uint8_t> cheater;
  std::vector<CheaterBehavior> behavior;

  std::size_t size() const { return y1.size(); }
};

Population GeneratePopulation(const PopulationConfig& config, RandomStream& rng);

// Simulator-only latent truth, row-aligned with the emitted PrivateDataset.
struct TruthSidecar {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> y1;
  std::vector<std::uint8_t> y0;
  std::vector<std::uint8_t> cheater;
  std::vector<CheaterBehavior> behavior;
  std::vector<Prompt> prompt;
  std::vector<std::uint8_t> s;
  std::vector<std::uint8_t> a;

  std::size_t size() const { return y1.size(); }
  // Realized outcome Y(A).
  std::uint8_t observed_y(std::size_t i) const { return a[i] ? y1[i] : y0[i]; }
};

struct ProtocolOutput {
  PrivateDataset data;
  TruthSidecar truth;
};

ProtocolOutput RunProtocol(const Population& population, const DesignSpec& spec,
                           RandomStream& rng);

// Mean of Y(1) - Y(0) over non-cheaters. Throws kDegenerate if all cheat.
double TrueTauH(const TruthSidecar& truth);

// Fraction of cheaters in the sidecar.
double TrueLambda(const TruthSidecar& truth);

struct ReplicateOptions {
  std::vector<Method> methods{Method::kHDiff};
  WorkingModelOptions models;
  std::size_t bootstrap = 0;
  double alpha = 0.05;
  // Use this cheater proportion instead of estimating it.
  std::optional<double> known_lambda;
  std::size_t workers = 0;
  // Keep per-replicate values in the summary.
  bool keep_values = false;
};

struct MethodSummary {
  Method method;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double truth_mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double coverage = 0.0;
  std::optional<double> coverage_bootstrap;
  double mean_se_analytic = 0.0;
  std::optional<double> mean_se_bootstrap;
  double mean_analytic_variance = 0.0;  // mean of se_analytic^2
  double rejection_rate = 0.0;          // H0: tau = 0 at level alpha
  std::vector<double> values;
  std::vector<double> p_values;
};

struct LambdaSummary {
  double truth_mean = 0.0;
  double mean = 0.0;
  double raw_mean = 0.0;
  double variance = 0.0;
  double corrected_fraction = 0.0;
};

struct MonteCarloSummary {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double true_tau_h_mean = 0.0;
  LambdaSummary lambda;
  std::vector<MethodSummary> methods;

  const MethodSummary& For(Method method) const;
};

// Runs `reps` independent protocol + estimation cycles. Replicate i uses the
// substream Substream(i) of the root seed, so the result does not depend on
// the worker count.
MonteCarloSummary Replicate(const PopulationConfig& config,
                            const DesignSpec& spec, std::size_t reps,
                            std::uint64_t seed, const ReplicateOptions& options);

enum class GridKind { kEffect, kEpsilon };

std::string GridKindName(GridKind kind);

// One Monte Carlo summary per grid value. kEffect overrides the outcome
// model's treatment log-odds shift; kEpsilon rebuilds symmetric maps with
// SolveFrrForEpsilon(value, gap) and the spec's delta; a gap <= 0 means one
// third of r + r' at each point, which is feasible for every epsilon.
struct PowerPoint {
  double value;
  DesignSpec spec;
  MonteCarloSummary summary;
};

std::vector<PowerPoint> PowerGrid(const PopulationConfig& config,
                                  const DesignSpec& spec, GridKind kind,
                                  const std::vector<double>& values, double gap,
                                  std::size_t reps, std::uint64_t seed,
                                  const ReplicateOptions& options);

}  // namespace rprct

#endif  // RPRCT_SIMULATE_HPP_
