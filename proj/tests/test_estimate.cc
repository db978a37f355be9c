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
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "rprct/random.hpp"
#include "rprct/simulate.hpp"
#include "test_util.hpp"

namespace rprct {
namespace {

using ::rprct::testing::CellDataset;
using ::rprct::testing::ExpectErrorCode;

DesignSpec Symmetric(double r, double r_prime, double delta = 0.5) {
  return DesignSpec(delta, FrrParams::Symmetric(r), FrrParams::Symmetric(r_prime));
}

// Dataset with given per-split counts, arms alternating inside each split.
PrivateDataset SplitDataset(std::size_t n1, std::size_t ones1, std::size_t n2,
                            std::size_t ones2) {
  std::vector<std::uint8_t> y, a, s;
  for (std::size_t i = 0; i < n1; ++i) {
    y.push_back(i < ones1);
    a.push_back(i % 2);
    s.push_back(1);
  }
  for (std::size_t i = 0; i < n2; ++i) {
    y.push_back(i < ones2);
    a.push_back(i % 2);
    s.push_back(2);
  }
  return PrivateDataset(y, a, s);
}

// Profile log-likelihood maximized over the honest mean by golden-section
// search (the function is concave in mu).
double OracleProfile(std::size_t ones1, std::size_t n1, std::size_t ones2, std::size_t n2,
                     const DesignSpec& spec, double lambda) {
  auto ll = [&](double mu) {
    auto term = [](double k, double n, double p) {
      double v = 0;
      if (k > 0) v += k * std::log(p);
      if (n - k > 0) v += (n - k) * std::log(1 - p);
      return v;
    };
    const double p1 = (1 - lambda) * ResponseProbability(spec.frr1(), 0) +
                      (1 - lambda) * spec.frr1().truth_probability() * mu;
    const double p2 = (1 - lambda) * ResponseProbability(spec.frr2(), 0) +
                      (1 - lambda) * spec.frr2().truth_probability() * mu;
    return term(ones1, n1, p1) + term(ones2, n2, p2);
  };
  double lo = 0, hi = 1;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    (ll(x1) < ll(x2) ? lo : hi) = (ll(x1) < ll(x2) ? x1 : x2);
  }
  return std::max({ll(0.5 * (lo + hi)), ll(0.0), ll(1.0)});
}

TEST(EstimateLambdaTest, RawValueBySubstitution) {
  const DesignSpec spec = Symmetric(0.1, 0.2);
  const CheaterEstimate est = EstimateLambda(SplitDataset(100, 46, 100, 44), spec);
  EXPECT_NEAR(est.raw_value, 0.24, 1e-12);
  EXPECT_NEAR(est.lambda_hat, 0.24, 1e-12);
  EXPECT_FALSE(est.boundary_corrected);
  // Plug-in variance (symmetric form).
  const double var = ((1 - 0.4) * (1 - 0.4) * 0.46 * 0.54 / 0.5 +
                      (1 - 0.2) * (1 - 0.2) * 0.44 * 0.56 / 0.5) /
                     (0.01);
  EXPECT_NEAR(est.scaled_variance, var, 1e-9);
  EXPECT_NEAR(est.se, std::sqrt(var / 200), 1e-12);
}

TEST(EstimateLambdaTest, HonestMomentsGiveZero) {
  const DesignSpec spec = Symmetric(0.1, 0.2);
  for (double mu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double q1 = 0.1 + 0.8 * mu, q2 = 0.2 + 0.6 * mu;
    const std::size_t n = 10000;
    const CheaterEstimate est = EstimateLambda(
        SplitDataset(n, static_cast<std::size_t>(std::lround(q1 * n)), n,
                     static_cast<std::size_t>(std::lround(q2 * n))),
        spec);
    EXPECT_NEAR(est.raw_value, 0.0, 1e-12) << mu;
    EXPECT_GE(est.lambda_hat, 0.0);
    EXPECT_LE(est.lambda_hat, 1e-12);
  }
}

TEST(EstimateLambdaTest, NegativeRawValueCorrectedByLikelihood) {
  const DesignSpec spec = Symmetric(0.1, 0.2);
  // q1 = 0.2, q2 = 0.3 gives raw = 1 - (0.12 - 0.24) / -0.1 = -0.2.
  const PrivateDataset data = SplitDataset(500, 100, 500, 150);
  const CheaterEstimate est = EstimateLambda(data, spec);
  ASSERT_LT(est.raw_value, 0.0);
  EXPECT_TRUE(est.boundary_corrected);
  EXPECT_NEAR(est.raw_value, -0.2, 1e-12);
  const double at0 = OracleProfile(100, 500, 150, 500, spec, 0.0);
  const double at1 = OracleProfile(100, 500, 150, 500, spec, kLambdaUpper);
  EXPECT_EQ(est.lambda_hat, at0 >= at1 ? 0.0 : kLambdaUpper);
  EXPECT_EQ(est.lambda_hat, 0.0);
}

TEST(ProfileLikelihoodTest, AgreesWithContinuousOracle) {
  const DesignSpec spec(0.5, FrrParams(0, 0.104), FrrParams(0, 0.1667));
  RandomStream rng(3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n1 = 50 + rng.UniformIndex(500), n2 = 50 + rng.UniformIndex(500);
    const std::size_t o1 = rng.UniformIndex(n1 + 1), o2 = rng.UniformIndex(n2 + 1);
    SplitMeans counts{n1, n2, o1, o2};
    for (double lambda : {0.0, 0.3, kLambdaUpper}) {
      const double got = ProfileLogLikelihood(counts, spec, lambda);
      const double oracle = OracleProfile(o1, n1, o2, n2, spec, lambda);
      // The grid maximum is below the continuous one by O(n * step^2).
      EXPECT_LE(got, oracle + 1e-9);
      EXPECT_GE(got, oracle - 1e-3) << t << " " << lambda;
    }
  }
}

TEST(EstimateLambdaTest, ClampedToUnitInterval) {
  const DesignSpec spec = Symmetric(0.1, 0.2);
  RandomStream rng(4);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n1 = 20 + rng.UniformIndex(40), n2 = 20 + rng.UniformIndex(40);
    const CheaterEstimate est = EstimateLambda(
        SplitDataset(n1, rng.UniformIndex(n1 + 1), n2, rng.UniformIndex(n2 + 1)), spec);
    EXPECT_GE(est.lambda_hat, 0.0);
    EXPECT_LE(est.lambda_hat, 1.0);
    if (est.raw_value < 0 || est.raw_value > 1) {
      EXPECT_TRUE(est.boundary_corrected);
    }
  }
}

TEST(EstimateLambdaTest, Errors) {
  const DesignSpec equal(0.5, FrrParams::Symmetric(0.2), FrrParams::Symmetric(0.2),
                         DesignSpec::AllowEqualMaps{});
  ExpectErrorCode(ErrorCode::kUnidentified,
                  [&] { EstimateLambda(SplitDataset(10, 5, 10, 5), equal); });
  ExpectErrorCode(ErrorCode::kDegenerate,
                  [&] { EstimateLambda(SplitDataset(10, 5, 0, 0), Symmetric(0.1, 0.2)); });
}

TEST(TauHDiffTest, SubstitutionExample) {
  const std::size_t sizes[2][2] = {{50, 50}, {50, 50}};
  const std::size_t ones[2][2] = {{20, 30}, {20, 30}};
  const PrivateDataset data = CellDataset(sizes, ones);
  const EffectEstimate est =
      EstimateTauHDiff(data, Symmetric(0.2, 0.1), CheaterEstimate::Known(0.2));
  EXPECT_NEAR(est.tau_hat, 0.2 / (0.8 * 0.7), 1e-12);
  EXPECT_NEAR(est.tau_hat, 0.35714, 1e-5);
  const double denom = 0.8 * 0.7;
  const double v = (0.24 / 0.5 + 0.24 / 0.5) / (denom * denom) + est.tau_hat * est.tau_hat * 2;
  EXPECT_NEAR(est.se_analytic, std::sqrt(v / 200), 1e-12);
  const double z = CriticalValue(0.05);
  EXPECT_NEAR(est.ci_low, est.tau_hat - z * est.se_analytic, 1e-15);
  EXPECT_NEAR(est.ci_high, est.tau_hat + z * est.se_analytic, 1e-15);
}

TEST(TauHDiffTest, EqualArmMeansGiveZero) {
  // Control 22 / 70 and treated 44 / 140.
  const std::size_t sizes[2][2] = {{40, 60}, {30, 80}};
  const std::size_t ones[2][2] = {{10, 15}, {12, 29}};
  const PrivateDataset data = CellDataset(sizes, ones);
  for (double lambda : {0.0, 0.3, 0.7}) {
    EXPECT_EQ(EstimateTauHDiff(data, Symmetric(0.25, 0.1), CheaterEstimate::Known(lambda))
                  .tau_hat,
              0.0);
  }
}

TEST(TauHDiffTest, ReducesToClassicalWithIdentityMaps) {
  RandomStream rng(6);
  std::vector<std::uint8_t> y, a, s;
  for (int i = 0; i < 501; ++i) {
    y.push_back(rng.Bernoulli(0.4));
    a.push_back(rng.Bernoulli(0.5));
    s.push_back(rng.Bernoulli(0.5) ? 1 : 2);
  }
  const PrivateDataset data(y, a, s);
  const DesignSpec identity(0.5, FrrParams(0, 0), FrrParams(0, 0), DesignSpec::AllowEqualMaps{});
  const EffectEstimate h = EstimateTauHDiff(data, identity, CheaterEstimate::Known(0));
  const ClassicalEstimates c = EstimateClassical(y, a);
  EXPECT_EQ(h.tau_hat, c.diff.tau_hat);
  EXPECT_EQ(h.se_analytic * h.se_analytic,
            h.se_analytic * h.se_analytic);  // finite
  EXPECT_NEAR(h.se_analytic,
              std::sqrt(c.diff.se_analytic * c.diff.se_analytic +
                        2 * h.tau_hat * h.tau_hat / 501),
              1e-12);
}

TEST(TauHDiffTest, DegenerateDenominatorAndEmptyArm) {
  const std::size_t sizes[2][2] = {{5, 5}, {5, 5}};
  const std::size_t ones[2][2] = {{1, 2}, {1, 2}};
  const PrivateDataset data = CellDataset(sizes, ones);
  ExpectErrorCode(ErrorCode::kDegenerate, [&] {
    EstimateTauHDiff(data, Symmetric(0.1, 0.2), CheaterEstimate::Known(1 - 1e-6));
  });
  const std::size_t no_control[2][2] = {{0, 5}, {0, 5}};
  ExpectErrorCode(ErrorCode::kDegenerate, [&] {
    EstimateTauHDiff(CellDataset(no_control, ones), Symmetric(0.1, 0.2),
                     CheaterEstimate::Known(0));
  });
}

TEST(TauHDiffTest, ConstantArmsFloorStandardError) {
  const std::size_t sizes[2][2] = {{5, 5}, {5, 5}};
  const std::size_t ones[2][2] = {{0, 0}, {0, 0}};
  const EffectEstimate est = EstimateTauHDiff(CellDataset(sizes, ones), Symmetric(0.1, 0.2),
                                              CheaterEstimate::Known(0));
  EXPECT_EQ(est.se_analytic, kSeFloor);
  EXPECT_FALSE(est.warnings.empty());
}

TEST(TauHCovTest, ZeroModelsMatchDiffWhenAllocationMatchesDelta) {
  const std::size_t sizes[2][2] = {{37, 63}, {63, 37}};
  const std::size_t ones[2][2] = {{11, 40}, {30, 20}};
  const PrivateDataset data = CellDataset(sizes, ones);
  const DesignSpec spec = Symmetric(0.2, 0.1, 0.5);
  const CheaterEstimate lambda = EstimateLambda(data, spec);
  const std::vector<double> zero(data.size(), 0.0);
  const EffectEstimate cov = EstimateTauHCov(data, spec, lambda, zero, zero);
  const EffectEstimate diff = EstimateTauHDiff(data, spec, lambda);
  EXPECT_NEAR(cov.tau_hat, diff.tau_hat, 1e-12);
}

TEST(TauHCovTest, UsesDesignDeltaNotRealizedFraction) {
  const std::size_t sizes[2][2] = {{30, 70}, {30, 70}};
  const std::size_t ones[2][2] = {{15, 35}, {15, 35}};
  const PrivateDataset data = CellDataset(sizes, ones);
  const DesignSpec spec = Symmetric(0.2, 0.1, 0.5);
  const std::vector<double> zero(data.size(), 0.0);
  const EffectEstimate cov =
      EstimateTauHCov(data, spec, CheaterEstimate::Known(0), zero, zero);
  // Horvitz-Thompson with delta = 0.5: (70 / 0.5 - 30 / 0.5) / 200 / 0.7.
  EXPECT_NEAR(cov.tau_hat, (70 / 0.5 - 30 / 0.5) / 200 / 0.7, 1e-12);
}

TEST(TauHCovTest, VarianceFormula) {
  RandomStream rng(9);
  std::vector<std::uint8_t> y, a, s;
  std::vector<double> f1, f0;
  for (int i = 0; i < 300; ++i) {
    y.push_back(rng.Bernoulli(0.45));
    a.push_back(rng.Bernoulli(0.4));
    s.push_back(rng.Bernoulli(0.5) ? 1 : 2);
    f1.push_back(0.2 + 0.6 * rng.Uniform());
    f0.push_back(0.2 + 0.6 * rng.Uniform());
  }
  const PrivateDataset data(y, a, s);
  const DesignSpec spec = Symmetric(0.15, 0.05, 0.4);
  const CheaterEstimate lambda = CheaterEstimate::Known(0.1);
  const EffectEstimate est = EstimateTauHCov(data, spec, lambda, f1, f0);
  const double denom = 0.9 * spec.masking_factor();
  double t1 = 0, t0 = 0, dsq = 0, r1 = 0, r0 = 0, k1 = 0, k0 = 0;
  for (int i = 0; i < 300; ++i) {
    t1 += (y[i] - f1[i]) * a[i] / 0.4 + f1[i];
    t0 += (y[i] - f0[i]) * (1 - a[i]) / 0.6 + f0[i];
    dsq += (f1[i] - f0[i]) * (f1[i] - f0[i]);
    if (a[i]) {
      r1 += (y[i] - f1[i]) * (y[i] - f1[i]);
      ++k1;
    } else {
      r0 += (y[i] - f0[i]) * (y[i] - f0[i]);
      ++k0;
    }
  }
  const double tau = (t1 - t0) / 300 / denom;
  EXPECT_NEAR(est.tau_hat, tau, 1e-12);
  const double v = (dsq / 300 + r1 / k1 / 0.4 + r0 / k0 / 0.6) / (denom * denom) + tau * tau;
  EXPECT_NEAR(est.se_analytic, std::sqrt(v / 300), 1e-12);
}

TEST(TauHCovTest, RejectsPredictionsOutsideUnitInterval) {
  const std::size_t sizes[2][2] = {{5, 5}, {5, 5}};
  const std::size_t ones[2][2] = {{1, 2}, {1, 2}};
  const PrivateDataset data = CellDataset(sizes, ones);
  std::vector<double> f(20, 0.5);
  std::vector<double> bad = f;
  bad[3] = 1.2;
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] {
    EstimateTauHCov(data, Symmetric(0.1, 0.2), CheaterEstimate::Known(0), bad, f);
  });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] {
    EstimateTauHCov(data, Symmetric(0.1, 0.2), CheaterEstimate::Known(0),
                    std::vector<double>(3, 0.5), f);
  });
}

TEST(ClassicalTest, HandExamples) {
  const std::vector<std::uint8_t> y{1, 0, 0, 0}, a{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(EstimateClassical(y, a).diff.tau_hat, 0.5);
  const std::vector<std::uint8_t> constant{1, 1, 1, 1};
  const auto c = EstimateClassical(constant, a);
  EXPECT_EQ(c.diff.tau_hat, 0.0);
  EXPECT_EQ(c.cov.tau_hat, 0.0);
  const std::vector<std::uint8_t> empty_arm{1, 1, 1, 1};
  ExpectErrorCode(ErrorCode::kDegenerate, [&] { EstimateClassical(y, empty_arm); });
}

TEST(ClassicalTest, ConstantPredictionsGiveDiff) {
  RandomStream rng(10);
  std::vector<std::uint8_t> y, a;
  for (int i = 0; i < 400; ++i) {
    y.push_back(rng.Bernoulli(0.3));
    a.push_back(i < 200);
  }
  const double mean = std::count(y.begin(), y.end(), 1) / 400.0;
  const std::vector<double> f(400, mean);
  const auto c = EstimateClassical(y, a, f, f);
  EXPECT_NEAR(c.cov.tau_hat, c.diff.tau_hat, 1e-12);
}

TEST(WaldTest, NullAndQuantileIdentity) {
  EffectEstimate est;
  est.tau_hat = 0.3;
  est.se_analytic = 0.1;
  auto w = WaldTest(est, 0.3);
  EXPECT_EQ(w.statistic, 0.0);
  EXPECT_EQ(w.p_value, 1.0);
  EXPECT_FALSE(w.reject);
  est.tau_hat = 0.196;
  w = WaldTest(est, 0.0);
  EXPECT_NEAR(w.statistic, 1.96, 1e-12);
  EXPECT_NEAR(w.p_value, 0.05, 1e-3);
  EXPECT_NEAR(CriticalValue(0.05), 1.959963984540054, 1e-12);
  est.se_analytic = 0.0;
  ExpectErrorCode(ErrorCode::kDegenerate, [&] { WaldTest(est); });
}

TEST(InvarianceTest, SwappingSplitLabelsAndMaps) {
  RandomStream rng(12);
  std::vector<std::uint8_t> y, a, s;
  for (int i = 0; i < 1000; ++i) {
    y.push_back(rng.Bernoulli(0.4));
    a.push_back(rng.Bernoulli(0.5));
    s.push_back(rng.Bernoulli(0.5) ? 1 : 2);
  }
  const PrivateDataset data(y, a, s);
  const DesignSpec spec(0.5, FrrParams(0.05, 0.2), FrrParams(0.02, 0.08));
  const DesignSpec swapped_spec(0.5, spec.frr2(), spec.frr1());
  const PrivateDataset swapped = data.SwapSubsamples();
  const CheaterEstimate l1 = EstimateLambda(data, spec);
  const CheaterEstimate l2 = EstimateLambda(swapped, swapped_spec);
  EXPECT_EQ(l1.lambda_hat, l2.lambda_hat);
  EXPECT_EQ(l1.se, l2.se);
  EXPECT_EQ(EstimateTauHDiff(data, spec, l1).tau_hat,
            EstimateTauHDiff(swapped, swapped_spec, l2).tau_hat);
}

TEST(BootstrapTest, DeterministicAndWorkerIndependent) {
  PopulationConfig config;
  config.n = 800;
  config.lambda = 0.2;
  config.outcome.treatment_shift = 0.5;
  const DesignSpec spec = Symmetric(0.25, 0.05);
  RandomStream root(1);
  RandomStream pop_rng = root.Substream("population"), protocol_rng = root.Substream("protocol");
  const auto out = RunProtocol(GeneratePopulation(config, pop_rng), spec, protocol_rng);
  BootstrapOptions options;
  options.resamples = 300;
  options.seed = 5;
  options.workers = 1;
  const BootstrapTarget targets[] = {BootstrapTarget::kLambda, BootstrapTarget::kHDiff};
  const auto serial = Bootstrap(out.data, spec, targets, options);
  options.workers = 3;
  const auto parallel = Bootstrap(out.data, spec, targets, options);
  for (int t = 0; t < 2; ++t) {
    EXPECT_EQ(serial[t].values, parallel[t].values);
    EXPECT_EQ(serial[t].se, parallel[t].se);
    EXPECT_LE(serial[t].ci_low, serial[t].ci_high);
  }
  options.seed = 6;
  EXPECT_NE(Bootstrap(out.data, spec, targets, options)[1].se, serial[1].se);
}

TEST(BootstrapTest, Validation) {
  const PrivateDataset data = SplitDataset(10, 5, 10, 5);
  BootstrapOptions options;
  options.resamples = 99;
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [&] { BootstrapSe(data, Symmetric(0.1, 0.2), BootstrapTarget::kHDiff, options); });
  options.resamples = 100;
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [&] { BootstrapSe(data, Symmetric(0.1, 0.2), BootstrapTarget::kHCov, options); });
}

TEST(BootstrapTest, TooManyDegenerateResamplesFail) {
  // Four rows: most resamples miss an arm or a subsample.
  const PrivateDataset data({0, 1, 0, 1}, {0, 1, 1, 0}, {1, 1, 2, 2});
  BootstrapOptions options;
  options.resamples = 200;
  const std::string message = ExpectErrorCode(ErrorCode::kDegenerate, [&] {
    BootstrapSe(data, Symmetric(0.1, 0.2), BootstrapTarget::kHDiff, options);
  });
  EXPECT_NE(message.find("1%"), std::string::npos);
}

TEST(BootstrapTest, SeNearMonteCarloSd) {
  PopulationConfig config;
  config.n = 5000;
  config.lambda = 0.2;
  config.outcome.intercept = -0.3;
  config.outcome.treatment_shift = 0.6;
  const DesignSpec spec = Symmetric(0.25, 0.05);
  std::vector<double> taus;
  for (std::uint64_t r = 0; r < 400; ++r) {
    RandomStream root = RandomStream(77).Substream(r);
    RandomStream p = root.Substream("population"), q = root.Substream("protocol");
    const auto out = RunProtocol(GeneratePopulation(config, p), spec, q);
    taus.push_back(EstimateTauHDiff(out.data, spec, EstimateLambda(out.data, spec)).tau_hat);
  }
  const double mc_sd = std::sqrt(testing::SampleVariance(taus));
  RandomStream root(78);
  RandomStream p = root.Substream("population"), q = root.Substream("protocol");
  const auto out = RunProtocol(GeneratePopulation(config, p), spec, q);
  BootstrapOptions options;
  options.resamples = 5000;
  options.seed = 1;
  const BootstrapResult boot = BootstrapSe(out.data, spec, BootstrapTarget::kHDiff, options);
  EXPECT_NEAR(boot.se / mc_sd, 1.0, 0.15) << boot.se << " vs " << mc_sd;
}

Covariate Numeric(const std::string& name, std::vector<double> values) {
  return Covariate{name, CovariateKind::kNumeric, {}, std::move(values)};
}

TEST(BalanceTest, IdenticalArmsAndConstantCovariate) {
  const double nan = std::nan("");
  const PrivateDataset data(
      {0, 1, 0, 1}, {0, 0, 1, 1}, {1, 2, 1, 2},
      {Numeric("x", {1, 2, 1, 2}), Numeric("constant", {3, 3, 3, 3}),
       Numeric("gone", {nan, nan, nan, nan}),
       Covariate{"cat", CovariateKind::kCategorical, {"a", "b"}, {0, 1, 0, 1}}});
  const auto rows = CovariateBalance(data);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].covariate, "x");
  ASSERT_TRUE(rows[0].smd.has_value());
  EXPECT_EQ(*rows[0].smd, 0.0);
  EXPECT_FALSE(rows[1].smd.has_value());
  EXPECT_FALSE(rows[2].smd.has_value());
  EXPECT_EQ(rows[2].missing_treated, 1.0);
  EXPECT_TRUE(std::isnan(rows[2].mean_treated));
  EXPECT_EQ(rows[3].covariate, "cat=a");
  EXPECT_EQ(rows[4].covariate, "cat=b");
  EXPECT_EQ(*rows[3].smd, 0.0);
}

TEST(BalanceTest, RandomizedArmsBalanced) {
  RandomStream rng(13);
  std::vector<std::uint8_t> y, a, s;
  std::vector<double> x1, x2;
  for (int i = 0; i < 10000; ++i) {
    y.push_back(rng.Bernoulli(0.5));
    a.push_back(rng.Bernoulli(0.5));
    s.push_back(rng.Bernoulli(0.5) ? 1 : 2);
    x1.push_back(rng.Normal());
    x2.push_back(rng.Bernoulli(0.3));
  }
  const PrivateDataset data(y, a, s, {Numeric("x1", x1), Numeric("x2", x2)});
  for (const auto& row : CovariateBalance(data)) {
    ASSERT_TRUE(row.smd.has_value());
    EXPECT_LT(std::abs(*row.smd), 0.1);
    EXPECT_FALSE(row.flagged);
  }
}

TEST(WorkingModelsTest, ZeroAndInterceptKinds) {
  RandomStream rng(14);
  std::vector<std::uint8_t> y, a, s;
  std::vector<double> x;
  for (int i = 0; i < 400; ++i) {
    a.push_back(i % 2);
    s.push_back(rng.Bernoulli(0.5) ? 1 : 2);
    x.push_back(rng.Normal());
    y.push_back(rng.Bernoulli(a.back() ? 0.6 : 0.3));
  }
  const PrivateDataset data(y, a, s, {Numeric("x", x)});
  WorkingModelOptions options;
  options.kind = WorkingModelKind::kZero;
  auto m = FitWorkingModels(data, options);
  EXPECT_FALSE(m.treated.has_value());
  EXPECT_EQ(m.f1, std::vector<double>(400, 0.0));
  options.kind = WorkingModelKind::kInterceptOnly;
  m = FitWorkingModels(data, options);
  const ArmMeans arms = CountArms(data.y_tilde(), data.a());
  EXPECT_NEAR(m.f1[0], arms.mean_treated(), 1e-9);
  EXPECT_NEAR(m.f0[7], arms.mean_control(), 1e-9);
  EXPECT_EQ(ParseWorkingModelKind(WorkingModelKindName(WorkingModelKind::kAicForward)),
            WorkingModelKind::kAicForward);
  ExpectErrorCode(ErrorCode::kInvalidArgument, [] { ParseWorkingModelKind("lasso"); });
}

TEST(AnalyzeTest, ReportFieldsPopulated) {
  PopulationConfig config;
  config.n = 600;
  config.lambda = 0.2;
  CovariateGenerator x;
  x.name = "x";
  config.covariates.push_back(x);
  config.outcome.coefficients = {{0.8}};
  config.outcome.treatment_shift = 0.5;
  const DesignSpec spec = Symmetric(0.25, 0.05);
  RandomStream root(2);
  RandomStream p = root.Substream("population"), q = root.Substream("protocol");
  const auto out = RunProtocol(GeneratePopulation(config, p), spec, q);
  EstimateOptions options;
  options.bootstrap = 200;
  const EstimateReport report = Analyze(out.data, spec, "y", options);
  EXPECT_EQ(report.outcome, "y");
  EXPECT_EQ(report.n, 600u);
  ASSERT_TRUE(report.hcov.has_value());
  ASSERT_TRUE(report.hdiff.se_bootstrap.has_value());
  ASSERT_TRUE(report.lambda_se_bootstrap.has_value());
  ASSERT_TRUE(report.hdiff_bootstrap.has_value());
  EXPECT_TRUE(report.hdiff_bootstrap->values.empty());
  EXPECT_EQ(report.balance.size(), 1u);
  ASSERT_TRUE(report.model_treated.has_value());
  EXPECT_EQ(report.model_treated->aic_path.front().action, "start");

  options.bootstrap = 0;
  const EstimateReport analytic = Analyze(out.data, spec, "y", options);
  EXPECT_FALSE(analytic.hdiff.se_bootstrap.has_value());
  EXPECT_EQ(analytic.hdiff.tau_hat, report.hdiff.tau_hat);
}

}  // namespace
}  // namespace rprct
