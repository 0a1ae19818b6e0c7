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

#include <numeric>
#include <string>

namespace byzgd {

std::string_view to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::kNormTrimOptionI: return "norm_trim_1";
    case AggregatorKind::kNormTrimOptionII: return "norm_trim_2";
    case AggregatorKind::kVanillaMean: return "vanilla_mean";
    case AggregatorKind::kCoordTrimmedMean: return "coord_trimmed_mean";
    case AggregatorKind::kSignMajority: return "sign_majority";
  }
  return "unknown";
}

AggregatorKind aggregator_kind_from_string(std::string_view name) {
  for (auto kind : {AggregatorKind::kNormTrimOptionI, AggregatorKind::kNormTrimOptionII,
                    AggregatorKind::kVanillaMean, AggregatorKind::kCoordTrimmedMean,
                    AggregatorKind::kSignMajority}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidSpec("unknown aggregator kind '" + std::string(name) + "'");
}

void AggregatorSpec::validate() const {
  if (!(beta >= 0 && beta < 1)) throw InvalidSpec("aggregator.beta must lie in [0, 1)");
  if (kind == AggregatorKind::kCoordTrimmedMean && beta >= 0.5) {
    throw InvalidSpec("aggregator.beta must be < 1/2 for coordinate-wise trimming");
  }
}

int trim_count(int m, double beta) { return fraction_ceil(beta, m); }

TrimOutcome norm_trim(const Matrix<double>& columns, const ParamVector& keys, double beta) {
  const auto m = static_cast<int>(columns.cols());
  if (m == 0) throw InvalidInput("norm trimming of an empty message list");
  if (keys.size() != m) throw InvalidInput("one norm key per worker is required");
  if (!(beta >= 0 && beta < 1)) throw InvalidInput("beta must lie in [0, 1)");
  const int cut = trim_count(m, beta);
  if (cut >= m) throw InvalidInput("beta trims every worker");

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&keys](int a, int b) { return keys(a) < keys(b); });

  TrimOutcome out;
  out.kept.assign(order.begin(), order.end() - cut);
  out.trimmed.assign(order.end() - cut, order.end());
  std::sort(out.kept.begin(), out.kept.end());
  std::sort(out.trimmed.begin(), out.trimmed.end());
  out.update = ParamVector::Zero(columns.rows());
  for (int i : out.kept) out.update += columns.col(i);
  out.update /= static_cast<double>(out.kept.size());
  return out;
}

Matrix<double> decode_columns(std::span<const CompressedMsg> msgs) {
  if (msgs.empty()) throw InvalidInput("no messages");
  const Index d = msgs.front().dim;
  Matrix<double> columns(d, static_cast<Index>(msgs.size()));
  for (std::size_t j = 0; j < msgs.size(); ++j) {
    if (msgs[j].dim != d) throw InvalidInput("messages disagree on dimension");
    columns.col(static_cast<Index>(j)) = decompress(msgs[j]);
  }
  return columns;
}

TrimOutcome norm_trim(std::span<const CompressedMsg> msgs, const AggregatorSpec& spec,
                      TrimOption option) {
  if (msgs.empty()) throw InvalidInput("norm trimming of an empty message list");
  const Matrix<double> columns = decode_columns(msgs);
  ParamVector keys(columns.cols());
  for (Index j = 0; j < columns.cols(); ++j) {
    if (option == TrimOption::kI) {
      const auto& norm = msgs[static_cast<std::size_t>(j)].reported_norm;
      if (!norm) throw InvalidInput("Option I needs a reported norm on every message");
      keys(j) = *norm;
    } else {
      keys(j) = columns.col(j).norm();
    }
  }
  return norm_trim(columns, keys, spec.beta);
}

ParamVector vanilla_mean(std::span<const CompressedMsg> msgs) {
  return vanilla_mean(decode_columns(msgs));
}

ParamVector sign_majority(std::span<const CompressedMsg> sign_msgs) {
  for (const auto& msg : sign_msgs) {
    if (msg.kind != CompressorKind::kSign) throw InvalidInput("majority vote needs Sign messages");
  }
  return sign_majority(decode_columns(sign_msgs));
}

}  // namespace byzgd
