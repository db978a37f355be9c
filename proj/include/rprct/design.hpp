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

#ifndef RPRCT_DESIGN_HPP_
#define RPRCT_DESIGN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rprct/mechanism.hpp"

namespace rprct {

// Experimental design of an RP-RCT: treatment probability and the FRR map
// used in each of the two random subsamples (S = 1 and S = 2).
class DesignSpec {
 public:
  // Validates 0 < delta < 1 and frr1 != frr2.
  DesignSpec(double delta, FrrParams frr1, FrrParams frr2);

  // Skips the frr1 != frr2 requirement. Only meant for reductions in tests
  // (e.g. identity maps in both subsamples); the cheater proportion is not
  // identified under such a design.
  struct AllowEqualMaps {};
  DesignSpec(double delta, FrrParams frr1, FrrParams frr2, AllowEqualMaps);

  double delta() const { return delta_; }
  const FrrParams& frr1() const { return frr1_; }
  const FrrParams& frr2() const { return frr2_; }
  const FrrParams& frr(int subsample) const {
    return subsample == 1 ? frr1_ : frr2_;
  }

  // Recomputed on each call from the two maps.
  PrivacyLoss epsilon() const { return EpsilonMixture(frr1_, frr2_); }

  // 1 - (r0 + r0' + r1 + r1') / 2; reduces to 1 - r - r' for symmetric maps.
  double masking_factor() const;

  // Denominator of the cheater-proportion identity,
  // r1 (1 - r0' - r1') - r1' (1 - r0 - r1); equals r - r' for symmetric maps.
  double identification_gap() const;

 private:
  double delta_;
  FrrParams frr1_;
  FrrParams frr2_;
};

// Symmetric (r, r') with r + r' = 2 / (e^epsilon + 1) and r - r' = gap.
// Throws kInfeasible when r' would be <= 0 or r >= 0.5, kDomain when
// epsilon <= 0 or gap <= 0.
std::pair<double, double> SolveFrrForEpsilon(double epsilon, double gap);

struct EfficiencyQuote {
  double relative_efficiency;
  double se_inflation;
  double sample_size_multiplier;
};

// Var(classical diff-in-means) / Var(privatized estimator) with no cheaters.
// epsilon may be +inf (returns 1).
EfficiencyQuote RelativeEfficiency(double epsilon, double delta, double tau0,
                                   double tau1);

// Same ratio computed from a design's actual channel (average forced-1 mass
// and masking factor). Agrees with RelativeEfficiency(spec.epsilon(), ...)
// for symmetric maps and stays meaningful for asymmetric ones, whose strict
// epsilon may be infinite.
EfficiencyQuote RelativeEfficiency(const DesignSpec& spec, double tau0,
                                   double tau1);

struct SampleSizeQuery {
  double epsilon;
  double delta;
  double tau0;
  double tau1;
  double power;
  double alpha;
  double effect;
  double lambda = 0.0;
};

struct SampleSize {
  std::uint64_t n;       // smallest integer meeting the target
  double n_exact;        // unrounded solution
  double classical_n_exact;
  double multiplier;     // n_exact / classical_n_exact
};

// Two-sided Wald power calculation on the variance of the privatized
// difference-in-means estimator; the lambda > 0 variant scales by
// (1 - lambda)^-2.
SampleSize RequiredSampleSize(const SampleSizeQuery& query);

struct DesignReport {
  DesignSpec spec;
  EpsilonVariants epsilon;
  double tau0;
  double tau1;
  EfficiencyQuote efficiency;
  double masking_factor;
  double identification_gap;
  std::vector<std::string> warnings;
};

DesignReport MakeDesignReport(const DesignSpec& spec, double tau0, double tau1);

}  // namespace rprct

#endif  // RPRCT_DESIGN_HPP_
