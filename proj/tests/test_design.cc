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

#include <algorithm>
#include <cmath>
#include <limits>

#include "gtest/gtest.h"
#include "rprct/random.hpp"
#include "test_util.hpp"

namespace rprct {
namespace {

using ::rprct::testing::ExpectErrorCode;

constexpr double kInf = std::numeric_limits<double>::infinity();

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double NormalQuantileByBisection(double p) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (NormalCdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Textbook two-proportion trial sizing: the smallest total n for which the
// one-tail approximation of Wald power reaches the target.
std::uint64_t TextbookSampleSize(double delta, double tau0, double tau1,
                                 double power, double alpha, double effect) {
  const double v = tau1 * (1 - tau1) / delta + tau0 * (1 - tau0) / (1 - delta);
  const double z = NormalQuantileByBisection(1 - alpha / 2);
  auto power_at = [&](double n) {
    return NormalCdf(std::abs(effect) / std::sqrt(v / n) - z);
  };
  std::uint64_t n = 1;
  while (power_at(static_cast<double>(n)) < power) n *= 2;
  std::uint64_t lo = n / 2, hi = n;
  while (hi - lo > 1) {
    const std::uint64_t mid = (lo + hi) / 2;
    (power_at(static_cast<double>(mid)) < power ? lo : hi) = mid;
  }
  return hi;
}

TEST(DesignSpecTest, Validation) {
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] {
    DesignSpec(0.5, FrrParams::Symmetric(0.25), FrrParams::Symmetric(0.25));
  });
  ExpectErrorCode(ErrorCode::kDomain, [] {
    DesignSpec(0.0, FrrParams::Symmetric(0.2), FrrParams::Symmetric(0.1));
  });
  ExpectErrorCode(ErrorCode::kDomain, [] {
    DesignSpec(1.0, FrrParams::Symmetric(0.2), FrrParams::Symmetric(0.1));
  });
  EXPECT_NO_THROW(DesignSpec(0.5, FrrParams(0, 0), FrrParams(0, 0), DesignSpec::AllowEqualMaps{}));
}

TEST(DesignSpecTest, DerivedQuantities) {
  const DesignSpec spec(0.5, FrrParams::Symmetric(0.25), FrrParams::Symmetric(0.15));
  EXPECT_NEAR(spec.masking_factor(), 0.6, 1e-15);
  EXPECT_NEAR(spec.identification_gap(), 0.1, 1e-15);
  EXPECT_EQ(spec.epsilon().epsilon, EpsilonSymmetric(0.25, 0.15).epsilon);
  const DesignSpec asym(0.5, FrrParams(0, 0.104), FrrParams(0, 0.1667));
  EXPECT_NEAR(asym.masking_factor(), 1 - (0.104 + 0.1667) / 2, 1e-15);
  EXPECT_NEAR(asym.identification_gap(), 0.104 * (1 - 0.1667) - 0.1667 * (1 - 0.104), 1e-15);
}

TEST(SolveFrrTest, Examples) {
  const auto [r, rp] = SolveFrrForEpsilon(2.0, 0.06);
  EXPECT_NEAR(r, 0.1492, 1e-4);
  EXPECT_NEAR(rp, 0.0892, 1e-4);
  EXPECT_NEAR(r + rp, 2 / (std::exp(2.0) + 1), 1e-15);
  ExpectErrorCode(ErrorCode::kDomain, [] { SolveFrrForEpsilon(std::log(3.0), 0.0); });
  ExpectErrorCode(ErrorCode::kInfeasible, [] { SolveFrrForEpsilon(0.01, 0.9); });
  ExpectErrorCode(ErrorCode::kDomain, [] { SolveFrrForEpsilon(-1, 0.01); });
}

TEST(SolveFrrTest, RoundTripOverEpsilonRange) {
  for (int i = 0; i <= 790; ++i) {
    const double eps = 0.1 + i * 0.01;
    const double sum = 2 / (std::exp(eps) + 1);
    for (double fraction : {0.1, 0.5, 0.9}) {
      // Feasible gaps: 0 < gap < r + r' with r = (sum + gap) / 2 <= 1/2.
      const double gap = fraction * std::min(sum, 1 - sum);
      const auto [r, rp] = SolveFrrForEpsilon(eps, gap);
      ASSERT_NEAR(EpsilonSymmetric(r, rp).epsilon, eps, 1e-9) << eps;
      ASSERT_NEAR(r - rp, gap, 1e-12);
    }
  }
}

TEST(RelativeEfficiencyTest, ClosedFormAtEpsilonTwo) {
  const auto q = RelativeEfficiency(2.0, 0.5, 0.5, 0.5);
  const double expected = 0.25 / ((1 / (std::exp(2.0) - 1) + 0.5) *
                                  (1 / (1 - std::exp(-2.0)) - 0.5));
  EXPECT_NEAR(q.relative_efficiency, expected, 1e-12);
  EXPECT_NEAR(q.relative_efficiency, 0.580, 1e-3);
  EXPECT_NEAR(q.se_inflation, 1.313, 1e-3);
  EXPECT_NEAR(q.se_inflation, std::pow(q.relative_efficiency, -0.5), 1e-12);
  EXPECT_NEAR(q.sample_size_multiplier, 1 / q.relative_efficiency, 1e-12);
}

TEST(RelativeEfficiencyTest, Limits) {
  EXPECT_EQ(RelativeEfficiency(kInf, 0.5, 0.4, 0.6).relative_efficiency, 1.0);
  EXPECT_GT(RelativeEfficiency(30, 0.5, 0.4, 0.6).relative_efficiency, 1 - 1e-9);
  EXPECT_LT(RelativeEfficiency(1e-4, 0.3, 0.4, 0.6).relative_efficiency, 1e-6);
  ExpectErrorCode(ErrorCode::kDomain, [] { RelativeEfficiency(0, 0.5, 0.5, 0.5); });
  ExpectErrorCode(ErrorCode::kDomain, [] { RelativeEfficiency(1, 1.5, 0.5, 0.5); });
  ExpectErrorCode(ErrorCode::kDomain, [] { RelativeEfficiency(1, 0.5, -0.1, 0.5); });
}

TEST(RelativeEfficiencyTest, StrictlyIncreasingAndBelowOne) {
  RandomStream rng(31);
  for (int t = 0; t < 5; ++t) {
    const double delta = 0.1 + 0.8 * rng.Uniform();
    const double tau0 = rng.Uniform(), tau1 = rng.Uniform();
    double previous = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double eps = 0.05 + i * 0.05;
      const double e = RelativeEfficiency(eps, delta, tau0, tau1).relative_efficiency;
      EXPECT_GT(e, previous) << eps;
      EXPECT_LE(e, 1.0);
      previous = e;
    }
  }
}

TEST(RelativeEfficiencyTest, DesignChannelAgreesForSymmetricMaps) {
  const auto [r, rp] = SolveFrrForEpsilon(1.5, 0.05);
  const DesignSpec spec(0.4, FrrParams::Symmetric(r), FrrParams::Symmetric(rp));
  EXPECT_NEAR(RelativeEfficiency(spec, 0.3, 0.7).relative_efficiency,
              RelativeEfficiency(1.5, 0.4, 0.3, 0.7).relative_efficiency, 1e-12);
}

TEST(SampleSizeTest, InfiniteEpsilonMatchesTextbookOracle) {
  RandomStream rng(4);
  for (int t = 0; t < 30; ++t) {
    const double delta = 0.2 + 0.6 * rng.Uniform();
    const double tau0 = 0.1 + 0.8 * rng.Uniform();
    const double tau1 = 0.1 + 0.8 * rng.Uniform();
    const double effect = 0.02 + 0.3 * rng.Uniform();
    const double power = 0.5 + 0.45 * rng.Uniform();
    const double alpha = 0.01 + 0.09 * rng.Uniform();
    const auto got = RequiredSampleSize({kInf, delta, tau0, tau1, power, alpha, effect});
    EXPECT_EQ(got.n, TextbookSampleSize(delta, tau0, tau1, power, alpha, effect));
    EXPECT_NEAR(got.multiplier, 1.0, 1e-12);
  }
}

TEST(SampleSizeTest, ScalesWithMultiplier) {
  const SampleSizeQuery base{2.0, 0.5, 0.4, 0.6, 0.8, 0.05, 0.1};
  const auto classical = RequiredSampleSize({kInf, 0.5, 0.4, 0.6, 0.8, 0.05, 0.1});
  const auto s = RequiredSampleSize(base);
  EXPECT_NEAR(s.n_exact, classical.n_exact * s.multiplier, 1e-9);
  EXPECT_NEAR(s.multiplier, RelativeEfficiency(2.0, 0.5, 0.4, 0.6).sample_size_multiplier, 1e-12);
  // Doubling the multiplier through the (1 - lambda)^-2 factor doubles n.
  SampleSizeQuery cheat = base;
  cheat.lambda = 1 - 1 / std::sqrt(2.0);
  EXPECT_NEAR(RequiredSampleSize(cheat).n_exact, 2 * s.n_exact, 1e-6);
}

TEST(SampleSizeTest, DomainErrors) {
  ExpectErrorCode(ErrorCode::kDomain, [] { RequiredSampleSize({2, 0.5, 0.4, 0.6, 0.8, 0.05, 0.0}); });
  ExpectErrorCode(ErrorCode::kDomain, [] { RequiredSampleSize({2, 0.5, 0.4, 0.6, 1.0, 0.05, 0.1}); });
  ExpectErrorCode(ErrorCode::kDomain, [] { RequiredSampleSize({2, 0.5, 0.4, 0.6, 0.8, 0.0, 0.1}); });
}

TEST(DesignReportTest, SymmetricExample) {
  const DesignSpec spec(0.5, FrrParams::Symmetric(0.25), FrrParams::Symmetric(0.15));
  const DesignReport report = MakeDesignReport(spec, 0.5, 0.5);
  EXPECT_NEAR(report.masking_factor, 0.6, 1e-15);
  EXPECT_EQ(report.epsilon.strict.epsilon, EpsilonSymmetric(0.25, 0.15).epsilon);
}

TEST(DesignReportTest, EchoesSolvedEpsilon) {
  const auto [r, rp] = SolveFrrForEpsilon(2.0, 0.06);
  const DesignSpec spec(0.5, FrrParams::Symmetric(r), FrrParams::Symmetric(rp));
  const DesignReport report = MakeDesignReport(spec, 0.5, 0.5);
  EXPECT_NEAR(report.epsilon.strict.epsilon, 2.0, 1e-3);
  EXPECT_NEAR(report.efficiency.relative_efficiency, 0.580, 1e-3);
}

TEST(DesignReportTest, WarnsOnSmallGapAndInfiniteEpsilon) {
  const DesignSpec close(0.5, FrrParams::Symmetric(0.2), FrrParams::Symmetric(0.199));
  EXPECT_FALSE(MakeDesignReport(close, 0.5, 0.5).warnings.empty());
  const DesignSpec asym(0.5, FrrParams(0, 0.104), FrrParams(0, 0.1667));
  const DesignReport report = MakeDesignReport(asym, 0.5, 0.5);
  EXPECT_FALSE(report.epsilon.strict.finite());
  EXPECT_FALSE(report.warnings.empty());
  EXPECT_GT(report.efficiency.relative_efficiency, 0.0);
  EXPECT_LT(report.efficiency.relative_efficiency, 1.0);
}

}  // namespace
}  // namespace rprct
