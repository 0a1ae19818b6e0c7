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

// Attack models. Gradient-level attacks produce the arbitrary vector sent in
// place of an honest gradient; data-level attacks corrupt a worker's labels
// and let it compute honest gradients on the corrupted shard.

#ifndef BYZGD_BYZANTINE_HPP_
#define BYZGD_BYZANTINE_HPP_

#include <string_view>
#include <vector>

#include "byzgd/common.hpp"
#include "byzgd/problems.hpp"

namespace byzgd {

enum class AttackKind { kNone, kGaussianAdditive, kNegativeScaled, kRandomLabel, kLabelShift };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  double noise_var = 10.0;  // GaussianAdditive
  double eps = 0.9;         // NegativeScaled
  int num_classes = 10;     // LabelShift

  void validate() const;
  bool is_gradient_level() const {
    return kind == AttackKind::kNone || kind == AttackKind::kGaussianAdditive ||
           kind == AttackKind::kNegativeScaled;
  }
  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

/// g + N(0, noise_var I), -eps g, or g unchanged.
ParamVector corrupt_gradient(const AttackSpec& spec, const ParamVector& g, RandomStream& rng);

/// LabelShift maps y to (num_classes - 1) - y; RandomLabel redraws labels
/// uniformly. Features are untouched.
Dataset corrupt_shard(const AttackSpec& spec, const Dataset& shard, RandomStream& rng);

int byzantine_count(int m, double alpha);

/// floor(alpha m) distinct worker indices, drawn uniformly from the run seed,
/// in ascending order.
std::vector<int> select_byzantine(int m, double alpha, std::uint64_t seed);

}  // namespace byzgd

#endif  // BYZGD_BYZANTINE_HPP_
