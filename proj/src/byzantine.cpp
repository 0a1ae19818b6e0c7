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

#include "byzgd/byzantine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace byzgd {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kGaussianAdditive: return "gaussian";
    case AttackKind::kNegativeScaled: return "negative";
    case AttackKind::kRandomLabel: return "random_label";
    case AttackKind::kLabelShift: return "label_shift";
  }
  return "unknown";
}

AttackKind attack_kind_from_string(std::string_view name) {
  for (auto kind : {AttackKind::kNone, AttackKind::kGaussianAdditive, AttackKind::kNegativeScaled,
                    AttackKind::kRandomLabel, AttackKind::kLabelShift}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidSpec("unknown attack kind '" + std::string(name) + "'");
}

void AttackSpec::validate() const {
  if (!(noise_var >= 0)) throw InvalidSpec("attack.noise_var must be >= 0");
  if (!(eps >= 0 && eps <= 1)) throw InvalidSpec("attack.eps must lie in [0, 1]");
  if (kind == AttackKind::kLabelShift && num_classes < 2) {
    throw InvalidSpec("attack.num_classes must be >= 2");
  }
}

ParamVector corrupt_gradient(const AttackSpec& spec, const ParamVector& g, RandomStream& rng) {
  switch (spec.kind) {
    case AttackKind::kNone:
      return g;
    case AttackKind::kGaussianAdditive: {
      if (spec.noise_var == 0) return g;
      std::normal_distribution<double> normal(0.0, std::sqrt(spec.noise_var));
      return g + ParamVector::NullaryExpr(g.size(), [&] { return normal(rng); });
    }
    case AttackKind::kNegativeScaled:
      return -spec.eps * g;
    default:
      throw UnsupportedOperation("attack '" + std::string(to_string(spec.kind)) +
                                 "' corrupts data, not gradients");
  }
}

Dataset corrupt_shard(const AttackSpec& spec, const Dataset& shard, RandomStream& rng) {
  if (spec.is_gradient_level()) {
    throw UnsupportedOperation("attack '" + std::string(to_string(spec.kind)) +
                               "' corrupts gradients, not data");
  }
  if (shard.kind != ProblemKind::kLogisticSoftmax) {
    throw UnsupportedOperation("label attacks need a classification shard");
  }
  Dataset out = shard;
  if (spec.kind == AttackKind::kLabelShift) {
    out.y = (static_cast<double>(spec.num_classes - 1) - shard.y.array()).matrix();
  } else {
    std::uniform_int_distribution<int> label(0, shard.num_classes - 1);
    for (Index r = 0; r < out.y.size(); ++r) out.y(r) = label(rng);
  }
  return out;
}

int byzantine_count(int m, double alpha) { return fraction_floor(alpha, m); }

std::vector<int> select_byzantine(int m, double alpha, std::uint64_t seed) {
  std::vector<int> workers(static_cast<std::size_t>(m));
  std::iota(workers.begin(), workers.end(), 0);
  RandomStream rng = make_stream(seed, StreamPurpose::kByzantineSelection);
  // Fisher-Yates with an explicit draw so the permutation is library-independent.
  for (std::size_t i = workers.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(workers[i - 1], workers[j]);
  }
  workers.resize(static_cast<std::size_t>(byzantine_count(m, alpha)));
  std::sort(workers.begin(), workers.end());
  return workers;
}

}  // namespace byzgd
