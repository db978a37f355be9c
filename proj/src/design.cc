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

#include "rprct/design.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "rprct/status.hpp"

namespace rprct {

namespace {

void ValidateDelta(double delta) {
  Require(std::isfinite(delta) && delta > 0.0 && delta < 1.0,
          ErrorCode::kDomain, "treatment probability delta must lie in (0, 1)");
}

void ValidateMean(double tau, const char* name) {
  Require(std::isfinite(tau) && tau >= 0.0 && tau <= 1.0, ErrorCode::kDomain,
          std::string(name) + " must lie in [0, 1]");
}

double NormalQuantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

EfficiencyQuote MakeQuote(double classical, double privatized) {
  Require(classical > 0.0, ErrorCode::kDomain,
          "outcome means in {0, 1} give zero classical variance; relative "
          "efficiency is undefined");
  const double e = classical / privatized;
  return {e, 1.0 / std::sqrt(e), 1.0 / e};
}

}  // namespace

DesignSpec::DesignSpec(double delta, FrrParams frr1, FrrParams frr2)
    : DesignSpec(delta, frr1, frr2, AllowEqualMaps{}) {
  Require(!(frr1_ == frr2_), ErrorCode::kInvalidArgument,
          "the two subsamples need different FRR maps (r != r')");
}

DesignSpec::DesignSpec(double delta, FrrParams frr1, FrrParams frr2,
                       AllowEqualMaps)
    : delta_(delta), frr1_(frr1), frr2_(frr2) {
  ValidateDelta(delta);
}

double DesignSpec::masking_factor() const {
  return 1.0 - ((frr1_.r0() + frr1_.r1()) + (frr2_.r0() + frr2_.r1())) / 2.0;
}

double DesignSpec::identification_gap() const {
  return frr1_.r1() * frr2_.truth_probability() -
         frr2_.r1() * frr1_.truth_probability();
}

std::pair<double, double> SolveFrrForEpsilon(double epsilon, double gap) {
  Require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::kDomain,
          "target epsilon must be positive and finite");
  Require(std::isfinite(gap) && gap > 0.0, ErrorCode::kDomain,
          "gap |r - r'| must be positive (the maps must differ)");
  const double sum = 2.0 / (std::exp(epsilon) + 1.0);
  const double r = (sum + gap) / 2.0;
  const double r_prime = (sum - gap) / 2.0;
  if (r_prime <= 0.0 || r >= 0.5) {
    std::ostringstream msg;
    msg << "no symmetric design with epsilon=" << epsilon << " and gap=" << gap
        << ": r + r' = " << sum << " requires 0 < gap < r + r' and r < 0.5";
    Fail(ErrorCode::kInfeasible, msg.str());
  }
  return {r, r_prime};
}

EfficiencyQuote RelativeEfficiency(double epsilon, double delta, double tau0,
                                   double tau1) {
  Require(!std::isnan(epsilon) && epsilon > 0.0, ErrorCode::kDomain,
          "epsilon must be positive");
  ValidateDelta(delta);
  ValidateMean(tau0, "tau0");
  ValidateMean(tau1, "tau1");

  // 1/(e^eps - 1) and 1/(1 - e^-eps).
  const double lower = std::isinf(epsilon) ? 0.0 : 1.0 / std::expm1(epsilon);
  const double upper = std::isinf(epsilon) ? 1.0 : -1.0 / std::expm1(-epsilon);
  const double classical =
      (1.0 - delta) * tau1 * (1.0 - tau1) + delta * tau0 * (1.0 - tau0);
  const double privatized =
      (1.0 - delta) * (lower + tau1) * (upper - tau1) +
      delta * (lower + tau0) * (upper - tau0);
  return MakeQuote(classical, privatized);
}

EfficiencyQuote RelativeEfficiency(const DesignSpec& spec, double tau0,
                                   double tau1) {
  ValidateMean(tau0, "tau0");
  ValidateMean(tau1, "tau1");
  const double delta = spec.delta();
  const double m = spec.masking_factor();
  const double forced1 = (spec.frr1().r1() + spec.frr2().r1()) / 2.0;
  const double p1 = forced1 + m * tau1;
  const double p0 = forced1 + m * tau0;
  const double classical =
      (1.0 - delta) * tau1 * (1.0 - tau1) + delta * tau0 * (1.0 - tau0);
  const double privatized =
      ((1.0 - delta) * p1 * (1.0 - p1) + delta * p0 * (1.0 - p0)) / (m * m);
  return MakeQuote(classical, privatized);
}

SampleSize RequiredSampleSize(const SampleSizeQuery& q) {
  Require(std::isfinite(q.power) && q.power > 0.0 && q.power < 1.0,
          ErrorCode::kDomain, "power must lie in (0, 1)");
  Require(std::isfinite(q.alpha) && q.alpha > 0.0 && q.alpha < 1.0,
          ErrorCode::kDomain, "alpha must lie in (0, 1)");
  Require(std::isfinite(q.effect) && q.effect != 0.0, ErrorCode::kDomain,
          "effect must be nonzero for a finite sample size");
  Require(q.lambda >= 0.0 && q.lambda < 1.0, ErrorCode::kDomain,
          "lambda must lie in [0, 1)");
  const EfficiencyQuote quote =
      RelativeEfficiency(q.epsilon, q.delta, q.tau0, q.tau1);

  // Asymptotic variance of sqrt(n)(tau_hat - tau) for the classical
  // difference in means.
  const double classical_variance = q.tau1 * (1.0 - q.tau1) / q.delta +
                                    q.tau0 * (1.0 - q.tau0) / (1.0 - q.delta);
  const double z = NormalQuantile(1.0 - q.alpha / 2.0) + NormalQuantile(q.power);
  const double classical_n = z * z * classical_variance / (q.effect * q.effect);
  const double multiplier = quote.sample_size_multiplier /
                            ((1.0 - q.lambda) * (1.0 - q.lambda));
  const double n_exact = classical_n * multiplier;
  return {static_cast<std::uint64_t>(std::ceil(n_exact - 1e-9)), n_exact,
          classical_n, multiplier};
}

DesignReport MakeDesignReport(const DesignSpec& spec, double tau0, double tau1) {
  DesignReport report{spec,
                      ComputeEpsilonVariants(spec.frr1(), spec.frr2()),
                      tau0,
                      tau1,
                      RelativeEfficiency(spec, tau0, tau1),
                      spec.masking_factor(),
                      spec.identification_gap(),
                      {}};
  const double gap = std::abs(report.identification_gap);
  if (gap < 0.05) {
    std::ostringstream msg;
    msg << "identification gap " << gap
        << " is small; the cheater-proportion estimate will be noisy "
           "(its variance scales with 1/gap^2)";
    report.warnings.push_back(msg.str());
  }
  if (!report.epsilon.strict.finite()) {
    report.warnings.push_back(
        "one output value is impossible for one input, so the mixture is not "
        "differentially private for any finite epsilon; see the one-sided "
        "and symmetric-formula readings");
  }
  if (report.masking_factor < 0.1) {
    report.warnings.push_back(
        "masking factor below 0.1; effect estimates will be very imprecise");
  }
  return report;
}

}  // namespace rprct
