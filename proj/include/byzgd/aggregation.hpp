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

// Center-side aggregation. Worker messages are decoded into the columns of a
// d x m matrix; every reduction visits workers in index order so results do
// not depend on how the gather was scheduled.

#ifndef BYZGD_AGGREGATION_HPP_
#define BYZGD_AGGREGATION_HPP_

#include <algorithm>
#include <span>
#include <string_view>
#include <vector>

#include "byzgd/common.hpp"
#include "byzgd/compressors.hpp"

namespace byzgd {

enum class AggregatorKind {
  kNormTrimOptionI,
  kNormTrimOptionII,
  kVanillaMean,
  kCoordTrimmedMean,
  kSignMajority,
};

/// Option I: workers attach ||x||, the adversary compresses honestly.
/// Option II: the center recomputes ||Q(x)||, the adversary sends anything.
enum class TrimOption { kI, kII };

std::string_view to_string(AggregatorKind kind);
AggregatorKind aggregator_kind_from_string(std::string_view name);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::kNormTrimOptionI;
  double beta = 0.0;

  void validate() const;
  bool is_norm_trim() const {
    return kind == AggregatorKind::kNormTrimOptionI || kind == AggregatorKind::kNormTrimOptionII;
  }
  friend bool operator==(const AggregatorSpec&, const AggregatorSpec&) = default;
};

struct TrimOutcome {
  std::vector<int> kept;     // ascending worker indices
  std::vector<int> trimmed;  // ascending worker indices
  ParamVector update;        // mean of the kept columns
};

/// ceil(beta m): guarantees at least as many removals as floor(alpha m)
/// Byzantine workers whenever beta >= alpha.
int trim_count(int m, double beta);

/// Sorts workers by key ascending (ties by index), drops the trim_count(m,
/// beta) largest and averages the remaining columns.
TrimOutcome norm_trim(const Matrix<double>& columns, const ParamVector& keys, double beta);

/// Decodes the messages and sorts by the option's key: the reported norm
/// under Option I, the norm of the decoded vector under Option II.
TrimOutcome norm_trim(std::span<const CompressedMsg> msgs, const AggregatorSpec& spec,
                      TrimOption option);

ParamVector vanilla_mean(std::span<const CompressedMsg> msgs);

/// Per-coordinate sign of the summed signs, with a zero sum voting +1.
ParamVector sign_majority(std::span<const CompressedMsg> sign_msgs);

Matrix<double> decode_columns(std::span<const CompressedMsg> msgs);

template <typename Derived>
ParamVector vanilla_mean(const Eigen::MatrixBase<Derived>& columns) {
  if (columns.cols() == 0) throw InvalidInput("vanilla mean of no vectors");
  ParamVector sum = ParamVector::Zero(columns.rows());
  for (Index j = 0; j < columns.cols(); ++j) sum += columns.col(j);
  return sum / static_cast<double>(columns.cols());
}

/// Drops the ceil(beta m) largest and smallest values per coordinate and
/// averages the rest.
template <typename Derived>
ParamVector coord_trimmed_mean(const Eigen::MatrixBase<Derived>& columns, double beta) {
  const auto m = static_cast<int>(columns.cols());
  if (beta < 0 || beta >= 0.5) throw InvalidInput("coordinate trimming needs beta in [0, 1/2)");
  const int cut = trim_count(m, beta);
  if (m <= 2 * cut) throw InvalidInput("too few workers for coordinate-wise trimming");
  ParamVector out(columns.rows());
  std::vector<double> values(static_cast<std::size_t>(m));
  for (Index r = 0; r < columns.rows(); ++r) {
    for (int j = 0; j < m; ++j) values[static_cast<std::size_t>(j)] = columns(r, j);
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (int j = cut; j < m - cut; ++j) sum += values[static_cast<std::size_t>(j)];
    out(r) = sum / static_cast<double>(m - 2 * cut);
  }
  return out;
}

template <typename Derived>
ParamVector sign_majority(const Eigen::MatrixBase<Derived>& sign_columns) {
  if (sign_columns.cols() == 0) throw InvalidInput("majority vote of no vectors");
  ParamVector votes = ParamVector::Zero(sign_columns.rows());
  for (Index j = 0; j < sign_columns.cols(); ++j) votes += sign_of(sign_columns.col(j));
  return sign_of(votes);
}

}  // namespace byzgd

#endif  // BYZGD_AGGREGATION_HPP_
