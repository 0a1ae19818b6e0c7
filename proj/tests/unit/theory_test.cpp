// Copyright 2026 The byzgd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "byzgd/theory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "byzgd/common.hpp"

namespace byzgd::theory {
namespace {

// Reference values from tests/oracles/theory_oracle.py (mpmath, 40 digits).
constexpr double kEps1Unit = 2.0986122886681096914;
constexpr double kEps2Unit = 1.0986122886681096914;
constexpr double kEpsCombined = 4.7901234567901238613;
constexpr double kEpsTilde = 4.8711111111111115778;
constexpr double kThr2Example = 0.33057851239669422989;
constexpr double kEfExample = 0.018518518518518520803;
constexpr double kThr1Turn = 0.27128644612183094501;
constexpr double kThr2Turn = 1.0 / 3.0;

TheoryParams unit_params() {
  TheoryParams p;
  p.v = 1;
  p.d = 1;
  p.n = 1;
  p.m = 1;
  p.D = 1;
  p.Lhat = 1;
  return p;
}

TEST(Eps, UnitExample) {
  EXPECT_NEAR(eps1(unit_params()), kEps1Unit, 1e-14);
  EXPECT_NEAR(eps2(unit_params()), kEps2Unit, 1e-14);
}

TEST(Eps, Eps2IsEps1WithoutTailForOneWorker) {
  TheoryParams p = unit_params();
  p.d = 7;
  p.n = 13;
  EXPECT_NEAR(eps2(p), eps1(p) - 1.0 / p.n, 1e-12);
}

TEST(Eps, LimitsAndLinearity) {
  TheoryParams p = unit_params();
  p.n = 1e12;
  EXPECT_LT(eps1(p), 1e-5);
  p.m = 1e6;
  EXPECT_LT(eps2(p), 1e-8);
  TheoryParams q = unit_params();
  q.d = 3;
  q.n = 5;
  TheoryParams q2 = q;
  q2.v = 2;
  EXPECT_NEAR(eps1(q2) - 1.0 / q.n, 2 * (eps1(q) - 1.0 / q.n), 1e-12);
}

TEST(EpsCombined, WorkedExamples) {
  EXPECT_NEAR(eps_combined(0.1, 0.1, 0.96, 1.0, 1.0, 1.0), kEpsCombined, 1e-12);
  EXPECT_NEAR(eps_tilde(0.1, 0.1, 0.96, 1.0, 1.0, 1.0), kEpsTilde, 1e-12);
  EXPECT_DOUBLE_EQ(eps_combined(0, 0, 1, 0.5, 3, 2), 2 * (1 + 2) * 4);
  EXPECT_NEAR(eps_combined(0, 0, 1, 1e12, 3, 2), 2 * 4, 1e-9);
  EXPECT_DOUBLE_EQ(eps_tilde(0.1, 0.0, 0.8, 1.0, 1.2, 0.7), eps_combined(0.1, 0.0, 0.8, 1.0, 1.2, 0.7));
  EXPECT_DOUBLE_EQ(eps_tilde(0.1, 0.2, 1.0, 1.0, 1.2, 0.7), eps_combined(0.1, 0.2, 1.0, 1.0, 1.2, 0.7));
}

TEST(EpsCombined, FromParams) {
  TheoryParams p = unit_params();
  p.alpha = 0.1;
  p.beta = 0.2;
  p.delta = 0.5;
  p.m = 10;
  EXPECT_DOUBLE_EQ(eps_combined(p), eps_combined(0.1, 0.2, 0.5, p.lambda0, eps1(p), eps2(p)));
  EXPECT_DOUBLE_EQ(eps_tilde(p), eps_tilde(0.1, 0.2, 0.5, p.lambda0, eps1(p), eps2(p)));
}

TEST(EpsCombined, TildeNeverSmaller) {
  RandomStream rng(1);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const double beta = 0.499 * unif(rng);
    const double alpha = beta * unif(rng);
    const double delta = 1e-6 + (1 - 1e-6) * unif(rng);
    const double lambda0 = 1e-3 + unif(rng);
    const double e1 = 3 * unif(rng), e2 = 3 * unif(rng);
    EXPECT_GE(eps_tilde(alpha, beta, delta, lambda0, e1, e2),
              eps_combined(alpha, beta, delta, lambda0, e1, e2));
  }
}

TEST(Thresholds, Examples) {
  EXPECT_DOUBLE_EQ(delta_threshold_option1(0, 0, 0), 0.0);
  EXPECT_NEAR(delta_threshold_option1(0, 0.1, 0), 0.19, 1e-15);
  EXPECT_NEAR(delta_threshold_option1(0.05, 0.06, 0), 0.2944, 1e-12);
  EXPECT_DOUBLE_EQ(delta_threshold_option2(0, 0, 0), 0.0);
  EXPECT_NEAR(delta_threshold_option2(0, 0.1, 0), kThr2Example, 1e-15);
}

TEST(Thresholds, OptionTwoIsStricterWhenAlphaAtMostBeta) {
  for (double beta = 0; beta < 0.5; beta += 0.01) {
    for (double alpha = 0; alpha <= beta; alpha += 0.01) {
      for (double lambda0 : {0.0, 1e-2, 1.0}) {
        EXPECT_GE(delta_threshold_option2(alpha, beta, lambda0),
                  delta_threshold_option1(alpha, beta, lambda0));
      }
    }
  }
}

TEST(Thresholds, NondecreasingInBeta) {
  for (double alpha = 0; alpha < 0.5; alpha += 0.05) {
    for (double beta = 0; beta + 0.01 < 0.5; beta += 0.01) {
      EXPECT_LE(delta_threshold_option1(alpha, beta, 1e-2), delta_threshold_option1(alpha, beta + 0.01, 1e-2));
      EXPECT_LE(delta_threshold_option2(alpha, beta, 1e-2), delta_threshold_option2(alpha, beta + 0.01, 1e-2));
    }
  }
}

TEST(Thresholds, NondecreasingInAlphaUpToTurningPoint) {
  for (double beta : {0.0, 0.2, 0.45}) {
    for (double alpha = 0; alpha + 1e-3 <= kThr1Turn; alpha += 1e-3) {
      EXPECT_LE(delta_threshold_option1(alpha, beta, 1e-2), delta_threshold_option1(alpha + 1e-3, beta, 1e-2));
    }
    for (double alpha = 0; alpha + 1e-3 <= kThr2Turn; alpha += 1e-3) {
      EXPECT_LE(delta_threshold_option2(alpha, beta, 1e-2), delta_threshold_option2(alpha + 1e-3, beta, 1e-2));
    }
  }
}

TEST(Thresholds, DecreaseBeyondTurningPoint) {
  EXPECT_GT(delta_threshold_option1(kThr1Turn, 0.1, 0), delta_threshold_option1(0.45, 0.1, 0));
  EXPECT_GT(delta_threshold_option2(kThr2Turn, 0.1, 0), delta_threshold_option2(0.45, 0.1, 0));
}

TEST(EfCondition, Examples) {
  const auto zero = ef_condition(0, 0, 0.3);
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_TRUE(zero.satisfied);
  const auto ex = ef_condition(0.05, 0.1, 1);
  EXPECT_NEAR(ex.value, kEfExample, 1e-15);
  EXPECT_TRUE(ex.satisfied);
  EXPECT_NEAR(ex.margin, 0.107 - kEfExample, 1e-15);
  const auto bad = ef_condition(0.25, 0.25, 0);
  EXPECT_NEAR(bad.value, 8.0 / 9.0, 1e-15);
  EXPECT_FALSE(bad.satisfied);
}

TEST(EfDeltas, NoAdversaryNoCompression) {
  TheoryParams p = unit_params();
  p.d = 4;
  p.n = 50;
  p.m = 10;
  p.L_F = 2.5;
  p.sigma_sq = 3.0;
  p.c_univ = 2.0;
  const double e2 = eps2(p);
  const EfDeltas d = ef_deltas(p);
  EXPECT_NEAR(d.delta1, 50.0 / p.c_univ * e2 * e2, 1e-12);
  EXPECT_NEAR(d.delta2, 2 * p.L_F * e2 * e2 / p.c_univ, 1e-12);
  EXPECT_EQ(d.delta3, 0.0);
}

TEST(EfDeltas, HomogeneousInC) {
  TheoryParams p = unit_params();
  p.alpha = 0.05;
  p.beta = 0.1;
  p.delta = 0.4;
  p.sigma_sq = 2;
  p.m = 20;
  const EfDeltas a = ef_deltas(p);
  p.c_univ *= 2;
  const EfDeltas b = ef_deltas(p);
  EXPECT_NEAR(b.delta1, a.delta1 / 2, 1e-12);
  EXPECT_NEAR(b.delta2, a.delta2 / 2, 1e-12);
  EXPECT_NEAR(b.delta3, a.delta3 / 2, 1e-12);
  p.sigma_sq = 0;
  p.alpha = p.beta = 0;
  const EfDeltas c = ef_deltas(p);
  EXPECT_EQ(c.delta3, 0.0);
  EXPECT_NEAR(c.delta2, 2 * p.L_F * eps2(p) * eps2(p) / p.c_univ, 1e-12);
}

TEST(EfNoByz, TermsAndLimits) {
  const auto exact = ef_nobyz_terms(2.0, 0.1, 10, 1.0, 3.0, 1.0);
  EXPECT_EQ(exact.compression, 0.0);
  EXPECT_NEAR(exact.optimization, 2.0 / (0.1 * 11 * 0.45), 1e-12);
  const double far = ef_nobyz_bound(2.0, 0.1, 1e300, 1.0, 3.0, 0.5);
  EXPECT_NEAR(far, ef_nobyz_terms(2.0, 0.1, 0, 1.0, 3.0, 0.5).compression, 1e-12);
  EXPECT_THROW(ef_nobyz_bound(1, 1.0, 10, 1.0, 1, 0.5), InvalidInput);
  EXPECT_THROW(ef_nobyz_bound(1, 0.1, 10, 1.0, 1, 0.0), InvalidInput);
}

TEST(EfNoByz, CompressionTermDecaysFaster) {
  // With gamma = 1 / (L_F sqrt(T+1)) the terms scale as T^-1/2 and T^-1.
  const double L_F = 2.0, L = 1.5, delta = 0.3;
  std::vector<double> logT, logA, logB;
  for (double T : {1e4, 1e6, 1e8}) {
    const double gamma = 1.0 / (L_F * std::sqrt(T + 1));
    const auto terms = ef_nobyz_terms(1.0, gamma, T, L_F, L, delta);
    logT.push_back(std::log(T));
    logA.push_back(std::log(terms.optimization));
    logB.push_back(std::log(terms.compression));
  }
  auto slope = [&](const std::vector<double>& y) {
    const double mx = (logT[0] + logT[1] + logT[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
    double num = 0, den = 0;
    for (int i = 0; i < 3; ++i) {
      num += (logT[i] - mx) * (y[i] - my);
      den += (logT[i] - mx) * (logT[i] - mx);
    }
    return num / den;
  };
  EXPECT_NEAR(slope(logA), -0.5, 0.01);
  EXPECT_NEAR(slope(logB), -1.0, 0.01);
}

TEST(TheoryParams, Validation) {
  TheoryParams p = unit_params();
  EXPECT_NO_THROW(p.validate());
  p.alpha = 0.2;
  p.beta = 0.1;
  EXPECT_THROW(p.validate(), InvalidInput);
  p.beta = 0.5;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = unit_params();
  p.delta = 0;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(SuccessProbability, ImprovesWithSamples) {
  TheoryParams p = unit_params();
  p.d = 3;
  p.m = 10;
  const double small = success_probability(p);
  p.n = 100;
  EXPECT_GT(success_probability(p), small);
  EXPECT_NE(describe_failure_probability(p).find("c_univ"), std::string::npos);
}

}  // namespace
}  // namespace byzgd::theory
