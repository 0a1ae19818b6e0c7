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

#include "byzgd/problems.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace byzgd {

void PrintTo(ProblemKind kind, std::ostream* os) { *os << to_string(kind); }

namespace {

Dataset regression(Matrix<double> X, ParamVector y) {
  Dataset s;
  s.X = std::move(X);
  s.y = std::move(y);
  return s;
}

ProblemSpec small_spec(ProblemKind kind = ProblemKind::kLeastSquares) {
  ProblemSpec spec;
  spec.kind = kind;
  spec.N = 60;
  spec.d = 4;
  spec.m = 3;
  spec.noise_std = 0.1;
  spec.seed = 17;
  spec.num_classes = 3;
  return spec;
}

TEST(Generate, NoiselessShardsSatisfyModel) {
  ProblemSpec spec;
  spec.N = 4;
  spec.d = 2;
  spec.m = 2;
  const auto shards = generate(spec);
  ASSERT_EQ(shards.size(), 2u);
  for (const auto& s : shards) {
    EXPECT_EQ(s.n(), 2);
    EXPECT_LE((s.X * s.w_star - s.y).norm(), 1e-12);
  }
}

TEST(Generate, IsDeterministicInSeed) {
  const auto a = generate(small_spec());
  const auto b = generate(small_spec());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].X, b[i].X);
    EXPECT_EQ(a[i].y, b[i].y);
  }
  ProblemSpec other = small_spec();
  other.seed = 18;
  EXPECT_NE(generate(other)[0].X, a[0].X);
}

TEST(Generate, RemainderGoesToFirstShards) {
  ProblemSpec spec;
  spec.N = 5;
  spec.d = 2;
  spec.m = 2;
  const auto shards = generate(spec);
  EXPECT_EQ(shards[0].n(), 3);
  EXPECT_EQ(shards[1].n(), 2);
}

TEST(Generate, RejectsBadSpecs) {
  ProblemSpec spec;
  spec.N = 4;
  spec.d = 0;
  spec.m = 2;
  EXPECT_THROW(generate(spec), InvalidSpec);
  spec.d = 2;
  spec.N = 1;
  EXPECT_THROW(generate(spec), InvalidSpec);
}

TEST(Generate, LogisticLabelsInRange) {
  const auto shards = generate(small_spec(ProblemKind::kLogisticSoftmax));
  for (const auto& s : shards) {
    EXPECT_EQ(s.param_dim(), 4 * 3);
    EXPECT_GE(s.y.minCoeff(), 0);
    EXPECT_LE(s.y.maxCoeff(), 2);
  }
}

TEST(LocalGradient, LeastSquaresHandExample) {
  const Dataset s = regression(Matrix<double>::Identity(2, 2), ParamVector::LinSpaced(2, 1, 2));
  EXPECT_EQ(local_gradient(s, ParamVector::Zero(2)), (ParamVector(2) << -0.5, -1.0).finished());
}

TEST(LocalGradient, ZeroAtNoiselessOptimum) {
  ProblemSpec spec = small_spec();
  spec.noise_std = 0;
  const auto shards = generate(spec);
  EXPECT_LE(population_gradient(shards, shards[0].w_star).norm(), 1e-10);
}

TEST(LocalGradient, ScalingDataByTwoScalesByFour) {
  const auto s = generate(small_spec())[0];
  const Dataset doubled = regression(2 * s.X, 2 * s.y);
  const ParamVector w = ParamVector::Zero(s.features());
  EXPECT_LE((local_gradient(doubled, w) - 4 * local_gradient(s, w)).norm(), 1e-12);
}

TEST(LocalGradient, RejectsDimensionMismatch) {
  const auto s = generate(small_spec())[0];
  EXPECT_THROW(local_gradient(s, ParamVector::Zero(3)), InvalidInput);
}

TEST(PopulationGradient, MeanOfLocals) {
  const Matrix<double> I = Matrix<double>::Identity(2, 2);
  const std::vector<Dataset> shards = {regression(I, (ParamVector(2) << 1, 2).finished()),
                                       regression(I, (ParamVector(2) << 3, 4).finished())};
  EXPECT_EQ(population_gradient(shards, ParamVector::Zero(2)),
            (ParamVector(2) << -1.0, -1.5).finished());
  const std::vector<Dataset> one = {shards[0]};
  EXPECT_EQ(population_gradient(one, ParamVector::Zero(2)),
            local_gradient(shards[0], ParamVector::Zero(2)));
  const std::vector<Dataset> twins = {shards[0], shards[0]};
  EXPECT_EQ(population_gradient(twins, ParamVector::Zero(2)),
            local_gradient(shards[0], ParamVector::Zero(2)));
}

class FiniteDifference : public ::testing::TestWithParam<ProblemKind> {};

TEST_P(FiniteDifference, GradientMatchesCentralDifferences) {
  const auto shard = generate(small_spec(GetParam()))[0];
  RandomStream rng(4242);
  std::normal_distribution<double> normal;
  for (int point = 0; point < 10; ++point) {
    ParamVector w(shard.param_dim());
    for (Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
    const ParamVector g = local_gradient(shard, w);
    for (Index i = 0; i < w.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(w(i)));
      ParamVector up = w, down = w;
      up(i) += h;
      down(i) -= h;
      const double fd = (local_loss(shard, up) - local_loss(shard, down)) / (2 * h);
      EXPECT_LE(std::abs(fd - g(i)), 1e-5 * std::max(1.0, std::abs(g(i))))
          << "point " << point << " coord " << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(BothProblems, FiniteDifference,
                         ::testing::Values(ProblemKind::kLeastSquares,
                                           ProblemKind::kLogisticSoftmax),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Smoothness, HandExamples) {
  const std::vector<Dataset> identity = {regression(Matrix<double>::Identity(2, 2), ParamVector::Zero(2))};
  EXPECT_NEAR(smoothness_estimate(identity), 0.5, 1e-8);
  const std::vector<Dataset> scalar = {regression(Matrix<double>::Constant(1, 1, 3.0), ParamVector::Zero(1))};
  EXPECT_NEAR(smoothness_estimate(scalar), 9.0, 1e-8);
}

TEST(Smoothness, MatchesEigensolverAndScalesQuadratically) {
  const auto shards = generate(small_spec());
  Matrix<double> pooled(60, 4);
  Index row = 0;
  for (const auto& s : shards) {
    pooled.middleRows(row, s.n()) = s.X;
    row += s.n();
  }
  const Matrix<double> gram = pooled.transpose() * pooled / 60.0;
  const double oracle = Eigen::SelfAdjointEigenSolver<Matrix<double>>(gram).eigenvalues().maxCoeff();
  EXPECT_NEAR(smoothness_estimate(shards), oracle, 1e-6 * oracle);

  std::vector<Dataset> scaled = shards;
  for (auto& s : scaled) s.X *= 2;
  EXPECT_NEAR(smoothness_estimate(scaled), 4 * oracle, 4e-6 * oracle);
}

TEST(Smoothness, UnsupportedForLogistic) {
  EXPECT_THROW(smoothness_estimate(generate(small_spec(ProblemKind::kLogisticSoftmax))),
               UnsupportedOperation);
}

TEST(GradientNormBound, CorollaryFormula) {
  const Dataset s = regression(Matrix<double>::Identity(2, 2), ParamVector::Zero(2));
  EXPECT_NEAR(gradient_norm_bound(s, 1.0), 1.4571067811865475244, 1e-12);
  const Dataset zero = regression(Matrix<double>::Zero(2, 2), ParamVector::Zero(2));
  EXPECT_EQ(gradient_norm_bound(zero, 1.0), 0.0);
  EXPECT_GT(gradient_norm_bound(s, 2.0), gradient_norm_bound(s, 1.0));
}

TEST(GradientNormBound, HoldsAlongGradientDescent) {
  ProblemSpec spec;
  spec.N = 2000;
  spec.d = 20;
  spec.m = 10;
  spec.noise_std = 0.5;
  spec.seed = 3;
  const auto shards = generate(spec);
  const double gamma = 0.5 / smoothness_estimate(shards);
  ParamVector w = ParamVector::Zero(spec.d);
  std::vector<ParamVector> iterates = {w};
  for (int t = 0; t < 100; ++t) {
    w -= gamma * population_gradient(shards, w);
    iterates.push_back(w);
  }
  // D: diameter of a ball around w* containing every iterate.
  double diameter = 0;
  for (const auto& v : iterates) diameter = std::max(diameter, 2 * (v - shards[0].w_star).norm());
  int ok = 0;
  for (const auto& v : iterates) {
    bool all = true;
    for (const auto& s : shards) {
      all = all && local_gradient(s, v).squaredNorm() <= gradient_norm_bound(s, diameter);
    }
    ok += all ? 1 : 0;
  }
  EXPECT_GE(ok, static_cast<int>(0.99 * static_cast<double>(iterates.size())));
}

TEST(LoadCsv, ReadsRegressionAndClassification) {
  const std::string path = ::testing::TempDir() + "byzgd_data.csv";
  {
    std::ofstream out(path);
    out << "x1,x2,y\n1,0,1\n0,1,2\n1,1,3\n";
  }
  const Dataset reg = load_csv(path, ProblemKind::kLeastSquares);
  EXPECT_EQ(reg.n(), 3);
  EXPECT_LE((reg.w_star - (ParamVector(2) << 1, 2).finished()).norm(), 1e-12);
  const Dataset cls = load_csv(path, ProblemKind::kLogisticSoftmax, 4);
  EXPECT_EQ(cls.num_classes, 4);
  std::remove(path.c_str());
  EXPECT_THROW(load_csv(path, ProblemKind::kLeastSquares), IoError);
}

}  // namespace
}  // namespace byzgd
