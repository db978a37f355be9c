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

#include "rprct/mechanism.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "rprct/status.hpp"

namespace rprct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string Describe(double r0, double r1) {
  std::ostringstream out;
  out << "(r0=" << r0 << ", r1=" << r1 << ")";
  return out.str();
}

// Largest |log ratio| between the two rows of a binary channel, where
// p1 = Pr(out = 1 | y = 1) and p0 = Pr(out = 1 | y = 0).
double ChannelLoss(double p1, double p0, bool finite_only) {
  const std::array<std::array<double, 2>, 2> rows{{{p1, p0}, {1.0 - p1, 1.0 - p0}}};
  double worst = 0.0;
  for (const auto& row : rows) {
    const double a = row[0];
    const double b = row[1];
    if (a == 0.0 && b == 0.0) continue;
    if (a == 0.0 || b == 0.0) {
      if (finite_only) continue;
      return kInf;
    }
    worst = std::max(worst, std::abs(std::log(a) - std::log(b)));
  }
  return worst;
}

}  // namespace

FrrParams::FrrParams(double r0, double r1) : r0_(r0), r1_(r1) {
  Require(std::isfinite(r0) && std::isfinite(r1) && r0 >= 0.0 && r1 >= 0.0,
          ErrorCode::kDomain,
          "FRR probabilities must be nonnegative, got " + Describe(r0, r1));
  Require(r0 + r1 < 1.0, ErrorCode::kDomain,
          "FRR map needs r0 + r1 < 1 so the truthful branch can occur, got " +
              Describe(r0, r1));
}

std::string PromptName(Prompt prompt) {
  switch (prompt) {
    case Prompt::kForce0:
      return "force0";
    case Prompt::kForce1:
      return "force1";
    case Prompt::kReportTruth:
      return "truth";
  }
  return "unknown";
}

Prompt SamplePrompt(const FrrParams& params, RandomStream& rng) {
  const double u = rng.Uniform();
  if (u < params.r0()) return Prompt::kForce0;
  if (u < params.r0() + params.r1()) return Prompt::kForce1;
  return Prompt::kReportTruth;
}

double ResponseProbability(const FrrParams& params, int y) {
  Require(y == 0 || y == 1, ErrorCode::kDomain, "response must be 0 or 1");
  return params.r1() + params.truth_probability() * y;
}

PrivacyLoss EpsilonSymmetric(double r, double r_prime) {
  Require(r >= 0.0 && r < 0.5 && r_prime >= 0.0 && r_prime < 0.5,
          ErrorCode::kDomain, "symmetric FRR parameters must lie in [0, 0.5)");
  const double sum = r + r_prime;
  if (sum == 0.0) return {kInf};
  return {std::log(2.0 / sum - 1.0)};
}

PrivacyLoss EpsilonGeneral(std::span<const WeightedMap> maps) {
  Require(!maps.empty(), ErrorCode::kDomain, "at least one map is required");
  double total = 0.0;
  double p1 = 0.0;  // Pr(out = 1 | y = 1)
  double p0 = 0.0;  // Pr(out = 1 | y = 0)
  double forced0 = 0.0;
  for (const auto& m : maps) {
    Require(std::isfinite(m.weight) && m.weight >= 0.0, ErrorCode::kDomain,
            "mixture weights must be nonnegative");
    total += m.weight;
    p1 += m.weight * (1.0 - m.params.r0());
    p0 += m.weight * m.params.r1();
    forced0 += m.weight * m.params.r0();
  }
  Require(std::abs(total - 1.0) <= 1e-12, ErrorCode::kDomain,
          "mixture weights must sum to 1");

  // A symmetric channel (equal forced-0 and forced-1 mass q) has loss
  // ln(1/q - 1); evaluating it in this form matches EpsilonSymmetric bit for
  // bit when the maps are symmetric with weights 1/2.
  if (forced0 == p0 && p0 <= 0.5) {
    if (p0 == 0.0) return {kInf};
    return {std::log(1.0 / p0 - 1.0)};
  }
  return {ChannelLoss(p1, p0, /*finite_only=*/false)};
}

PrivacyLoss EpsilonMixture(const FrrParams& first, const FrrParams& second) {
  const std::array<WeightedMap, 2> maps{{{first, 0.5}, {second, 0.5}}};
  return EpsilonGeneral(maps);
}

EpsilonVariants ComputeEpsilonVariants(const FrrParams& first,
                                       const FrrParams& second) {
  EpsilonVariants v;
  v.strict = EpsilonMixture(first, second);

  const double sum = first.r1() + second.r1();
  if (sum == 0.0) {
    v.symmetric_formula = {kInf};
  } else if (first.symmetric() && second.symmetric() && first.r1() < 0.5 &&
             second.r1() < 0.5) {
    v.symmetric_formula = EpsilonSymmetric(first.r1(), second.r1());
  } else {
    v.symmetric_formula = {std::abs(std::log(2.0 / sum - 1.0))};
  }

  const double p1 = 0.5 * (1.0 - first.r0()) + 0.5 * (1.0 - second.r0());
  const double p0 = 0.5 * first.r1() + 0.5 * second.r1();
  v.one_sided = {ChannelLoss(p1, p0, /*finite_only=*/true)};
  return v;
}

std::string FormatEpsilon(const PrivacyLoss& loss) {
  if (!loss.finite()) return "inf";
  std::ostringstream out;
  out.precision(17);
  out << loss.epsilon;
  return out.str();
}

}  // namespace rprct
