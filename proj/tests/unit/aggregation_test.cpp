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

#include "byzgd/aggregation.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

namespace byzgd {
namespace {

std::vector<CompressedMsg> dense(const std::vector<std::vector<double>>& rows) {
  std::vector<CompressedMsg> out;
  for (const auto& r : rows) {
    ParamVector v = Eigen::Map<const ParamVector>(r.data(), static_cast<Index>(r.size()));
    out.push_back(compress(CompressorSpec::none(), v));
  }
  return out;
}

AggregatorSpec trim(double beta, AggregatorKind kind = AggregatorKind::kNormTrimOptionII) {
  return {kind, beta};
}

Matrix<double> random_columns(Index d, Index m, std::uint64_t seed) {
  RandomStream rng(seed);
  std::normal_distribution<double> normal;
  Matrix<double> c(d, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < d; ++i) c(i, j) = normal(rng);
  return c;
}

TEST(TrimCount, CeilWithTolerance) {
  EXPECT_EQ(trim_count(20, 0.15), 3);
  EXPECT_EQ(trim_count(20, 0.16), 4);
  EXPECT_EQ(trim_count(4, 0.25), 1);
  EXPECT_EQ(trim_count(3, 1.0 / 3.0), 1);
  EXPECT_EQ(trim_count(10, 0), 0);
}

TEST(NormTrim, DropsLargestKey) {
  const Matrix<double> columns = Matrix<double>::Ones(1, 4);
  const ParamVector keys = (ParamVector(4) << 1.0, 2.0, 3.0, 10.0).finished();
  const auto out = norm_trim(columns, keys, 0.25);
  EXPECT_EQ(out.trimmed, std::vector<int>{3});
  EXPECT_EQ(out.kept, (std::vector<int>{0, 1, 2}));
}

TEST(NormTrim, OptionTwoExample) {
  const auto msgs = dense({{1}, {2}, {9}});
  const auto out = norm_trim(msgs, trim(1.0 / 3.0), TrimOption::kII);
  EXPECT_DOUBLE_EQ(out.update(0), 1.5);
  EXPECT_EQ(out.trimmed, std::vector<int>{2});
}

TEST(NormTrim, OptionOneUsesReportedNorms) {
  auto msgs = dense({{1}, {2}, {9}});
  attach_norm(msgs[0], 100.0);
  attach_norm(msgs[1], 1.0);
  attach_norm(msgs[2], 2.0);
  const auto out = norm_trim(msgs, trim(1.0 / 3.0, AggregatorKind::kNormTrimOptionI), TrimOption::kI);
  EXPECT_EQ(out.trimmed, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(out.update(0), 5.5);
}

TEST(NormTrim, OptionOneRequiresNorms) {
  const auto msgs = dense({{1}, {2}});
  EXPECT_THROW(norm_trim(msgs, trim(0.0, AggregatorKind::kNormTrimOptionI), TrimOption::kI),
               InvalidInput);
}

TEST(NormTrim, TiesBrokenByIndex) {
  const Matrix<double> columns = (Matrix<double>(1, 4) << 5, 6, 7, 8).finished();
  const auto out = norm_trim(columns, ParamVector::Ones(4), 0.5);
  EXPECT_EQ(out.trimmed, (std::vector<int>{2, 3}));
  EXPECT_DOUBLE_EQ(out.update(0), 5.5);
}

TEST(NormTrim, Errors) {
  EXPECT_THROW(norm_trim(std::vector<CompressedMsg>{}, trim(0.1), TrimOption::kII), InvalidInput);
  const Matrix<double> columns = Matrix<double>::Ones(1, 2);
  EXPECT_THROW(norm_trim(columns, ParamVector::Ones(2), 1.0), InvalidInput);
  EXPECT_THROW(norm_trim(columns, ParamVector::Ones(3), 0.0), InvalidInput);
  EXPECT_THROW(AggregatorSpec({AggregatorKind::kNormTrimOptionI, 1.2}).validate(), InvalidSpec);
}

TEST(NormTrim, BetaZeroEqualsVanillaMean) {
  const Matrix<double> c = random_columns(6, 9, 1);
  std::vector<CompressedMsg> msgs;
  for (Index j = 0; j < c.cols(); ++j) {
    msgs.push_back(compress(CompressorSpec::none(), c.col(j)));
    attach_norm(msgs.back(), ParamVector(c.col(j)).norm());
  }
  EXPECT_EQ(norm_trim(msgs, trim(0.0), TrimOption::kII).update, vanilla_mean(msgs));
  EXPECT_EQ(norm_trim(msgs, trim(0.0, AggregatorKind::kNormTrimOptionI), TrimOption::kI).update,
            vanilla_mean(msgs));
}

TEST(NormTrimProperty, PermutationMapsIndexSets) {
  const Index m = 11;
  const Matrix<double> c = random_columns(5, m, 2);
  ParamVector keys(m);
  for (Index j = 0; j < m; ++j) keys(j) = c.col(j).norm();
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), RandomStream(3));
  Matrix<double> pc(5, m);
  ParamVector pk(m);
  for (Index j = 0; j < m; ++j) {
    pc.col(j) = c.col(perm[static_cast<std::size_t>(j)]);
    pk(j) = keys(perm[static_cast<std::size_t>(j)]);
  }
  const auto a = norm_trim(c, keys, 0.3);
  const auto b = norm_trim(pc, pk, 0.3);
  EXPECT_LE((a.update - b.update).norm(), 1e-14);
  std::vector<int> mapped;
  for (int j : b.trimmed) mapped.push_back(perm[static_cast<std::size_t>(j)]);
  std::sort(mapped.begin(), mapped.end());
  EXPECT_EQ(mapped, a.trimmed);
}

TEST(NormTrimProperty, OptionOneAlwaysCatchesOversizedByzantine) {
  RandomStream rng(8);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 10;
    const int byz = 1 + trial % 3;
    std::vector<CompressedMsg> msgs;
    double honest_max = 0;
    for (int i = 0; i < m - byz; ++i) {
      ParamVector g = ParamVector::Constant(3, unif(rng));
      msgs.push_back(compress(CompressorSpec::l1_qsgd(), g));
      attach_norm(msgs.back(), g.norm());
      honest_max = std::max(honest_max, g.norm());
    }
    for (int i = 0; i < byz; ++i) {
      ParamVector star = ParamVector::Constant(3, -1.0) * (honest_max + unif(rng));
      msgs.push_back(compress(CompressorSpec::l1_qsgd(), star));
      attach_norm(msgs.back(), star.norm() * 1.0);
    }
    const auto out = norm_trim(msgs, trim(0.3, AggregatorKind::kNormTrimOptionI), TrimOption::kI);
    for (int i = m - byz; i < m; ++i) {
      EXPECT_TRUE(std::binary_search(out.trimmed.begin(), out.trimmed.end(), i));
    }
  }
}

TEST(CoordTrimmedMean, Examples) {
  const Matrix<double> c = (Matrix<double>(1, 4) << 1, 2, 3, 100).finished();
  EXPECT_DOUBLE_EQ(coord_trimmed_mean(c, 0.25)(0), 2.5);
  const Matrix<double> same = ParamVector::LinSpaced(3, 1, 3).replicate(1, 5);
  EXPECT_TRUE(coord_trimmed_mean(same, 0.2).isApprox(ParamVector::LinSpaced(3, 1, 3)));
  const Matrix<double> r = random_columns(4, 7, 4);
  EXPECT_TRUE(coord_trimmed_mean(r, 0.0).isApprox(vanilla_mean(r)));
  EXPECT_THROW(coord_trimmed_mean(Matrix<double>::Ones(1, 2), 0.25), InvalidInput);
}

TEST(CoordTrimmedMean, AffineEquivariantPerCoordinate) {
  const Matrix<double> r = random_columns(6, 9, 5);
  const ParamVector shift = ParamVector::LinSpaced(6, -3, 3);
  const ParamVector base = coord_trimmed_mean(r, 0.2);
  const ParamVector moved = coord_trimmed_mean(r.colwise() + shift, 0.2);
  EXPECT_LE((moved - base - shift).norm(), 1e-12);
  EXPECT_LE((coord_trimmed_mean(2.0 * r, 0.2) - 2.0 * base).norm(), 1e-12);
}

TEST(SignMajority, Votes) {
  const Matrix<double> three = (Matrix<double>(1, 3) << 1, 1, -1).finished();
  EXPECT_EQ(sign_majority(three)(0), 1.0);
  const Matrix<double> tie = (Matrix<double>(1, 4) << 1, 1, -1, -1).finished();
  EXPECT_EQ(sign_majority(tie)(0), 1.0);
  const Matrix<double> single = (Matrix<double>(2, 1) << -1, 1).finished();
  EXPECT_EQ(sign_majority(single), ParamVector(single.col(0)));
}

TEST(SignMajority, OnMessages) {
  std::vector<CompressedMsg> msgs;
  for (double v : {-2.0, -1.0, 3.0}) {
    msgs.push_back(compress(CompressorSpec::sign(), ParamVector::Constant(2, v)));
  }
  EXPECT_EQ(sign_majority(msgs), ParamVector::Constant(2, -1.0));
  EXPECT_THROW(sign_majority(dense({{1.0}})), InvalidInput);
}

TEST(VanillaMean, Examples) {
  EXPECT_DOUBLE_EQ(vanilla_mean(dense({{1}, {2}, {3}}))(0), 2.0);
  EXPECT_TRUE(vanilla_mean(dense({{1, -2}, {-1, 2}})).isZero(0));
  EXPECT_EQ(vanilla_mean(dense({{4, 5}})), (ParamVector(2) << 4, 5).finished());
  EXPECT_THROW(vanilla_mean(std::vector<CompressedMsg>{}), InvalidInput);
}

TEST(Aggregation, KindNames) {
  for (auto kind : {AggregatorKind::kNormTrimOptionI, AggregatorKind::kNormTrimOptionII,
                    AggregatorKind::kVanillaMean, AggregatorKind::kCoordTrimmedMean,
                    AggregatorKind::kSignMajority}) {
    EXPECT_EQ(aggregator_kind_from_string(to_string(kind)), kind);
  }
}

}  // namespace
}  // namespace byzgd
