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

// Forced randomized response (FRR): the privatization map applied to each
// binary response, and the privacy accounting for one map or a mixture.

#ifndef RPRCT_MECHANISM_HPP_
#define RPRCT_MECHANISM_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "rprct/random.hpp"

namespace rprct {

// Forced-response probabilities of one FRR map. Construction validates
// r0, r1 >= 0 and r0 + r1 < 1.
class FrrParams {
 public:
  FrrParams(double r0, double r1);

  // Shortcut for the symmetric map r0 = r1 = r.
  static FrrParams Symmetric(double r) { return FrrParams(r, r); }

  double r0() const { return r0_; }
  double r1() const { return r1_; }
  bool symmetric() const { return r0_ == r1_; }

  // Probability that the truthful branch is taken.
  double truth_probability() const { return 1.0 - r0_ - r1_; }

  friend bool operator==(const FrrParams&, const FrrParams&) = default;

 private:
  double r0_;
  double r1_;
};

enum class Prompt : std::uint8_t { kForce0 = 0, kForce1 = 1, kReportTruth = 2 };

std::string PromptName(Prompt prompt);

// Draws Force0 w.p. r0, Force1 w.p. r1, ReportTruth otherwise. Consumes
// exactly one uniform from the stream.
Prompt SamplePrompt(const FrrParams& params, RandomStream& rng);

inline std::uint8_t Privatize(std::uint8_t y, Prompt prompt) {
  switch (prompt) {
    case Prompt::kForce0:
      return 0;
    case Prompt::kForce1:
      return 1;
    case Prompt::kReportTruth:
      break;
  }
  return y;
}

// Pr(privatized = 1 | y) = r1 + (1 - r0 - r1) y.
double ResponseProbability(const FrrParams& params, int y);

// Privacy loss epsilon of an (epsilon, 0)-DP map; +inf means no finite bound.
struct PrivacyLoss {
  double epsilon = std::numeric_limits<double>::infinity();

  bool finite() const { return epsilon < std::numeric_limits<double>::infinity(); }
};

// ln(2 / (r + r') - 1) for the half/half mixture of two symmetric maps.
// Throws kDomain unless r, r' lie in [0, 0.5). Returns +inf when r + r' = 0.
PrivacyLoss EpsilonSymmetric(double r, double r_prime);

struct WeightedMap {
  FrrParams params;
  double weight;
};

// Exact privacy loss of the marginal channel obtained by choosing map k with
// probability weight_k: the largest |log ratio| of Pr(out = s | y) between
// y = 1 and y = 0 over s in {0, 1}. Weights must be nonnegative and sum to 1.
PrivacyLoss EpsilonGeneral(std::span<const WeightedMap> maps);

// The two maps of an RP-RCT mixed with weight 1/2 each.
PrivacyLoss EpsilonMixture(const FrrParams& first, const FrrParams& second);

// The three privacy-loss readings reported for a pair of maps. `strict` is
// EpsilonMixture. `symmetric_formula` evaluates ln(2/(r+r') - 1) at the maps'
// forced-1 probabilities (equal to `strict` for symmetric maps).
// `one_sided` is the largest finite log ratio, ignoring outputs that one
// input can never produce.
struct EpsilonVariants {
  PrivacyLoss strict;
  PrivacyLoss symmetric_formula;
  PrivacyLoss one_sided;
};

EpsilonVariants ComputeEpsilonVariants(const FrrParams& first,
                                       const FrrParams& second);

// "inf" for infinite values, otherwise the number.
std::string FormatEpsilon(const PrivacyLoss& loss);

}  // namespace rprct

#endif  // RPRCT_MECHANISM_HPP_
