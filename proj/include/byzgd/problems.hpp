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

// Synthetic learning problems sharded across m workers, with local and
// population gradient oracles.

#ifndef BYZGD_PROBLEMS_HPP_
#define BYZGD_PROBLEMS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "byzgd/common.hpp"

namespace byzgd {

enum class ProblemKind { kLeastSquares, kLogisticSoftmax };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kLeastSquares;
  Index N = 0;
  Index d = 0;
  int m = 1;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  int num_classes = 10;  // LogisticSoftmax only
  std::optional<std::string> csv_path;

  void validate() const;
  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// One worker's shard. For classification y holds integer labels in
/// [0, num_classes) and the parameter vector is the column-major d x K
/// weight matrix, flattened.
struct Dataset {
  ProblemKind kind = ProblemKind::kLeastSquares;
  Matrix<double> X;
  ParamVector y;
  ParamVector w_star;  // empty when unknown
  int num_classes = 0;

  Index n() const { return X.rows(); }
  Index features() const { return X.cols(); }
  Index param_dim() const {
    return kind == ProblemKind::kLeastSquares ? X.cols() : X.cols() * num_classes;
  }
};

/// Deterministic in spec.seed. Shards are contiguous row blocks of one pooled
/// sample; the first N mod m workers get one extra row.
std::vector<Dataset> generate(const ProblemSpec& spec);

/// Splits a pooled dataset into m shards with the same remainder rule.
std::vector<Dataset> shard(const Dataset& pooled, int m);

/// Reads a header row, then one sample per line with the label last. For
/// regression w_star is set to the pooled least-squares solution.
Dataset load_csv(const std::string& path, ProblemKind kind, int num_classes = 0);

std::vector<Dataset> make_shards(const ProblemSpec& spec);

double local_loss(const Dataset& shard, const ParamVector& w);
ParamVector local_gradient(const Dataset& shard, const ParamVector& w);

double population_loss(std::span<const Dataset> shards, const ParamVector& w);
/// Arithmetic mean of the local gradients.
ParamVector population_gradient(std::span<const Dataset> shards, const ParamVector& w);

/// Largest eigenvalue of (1/N) X^T X over the pooled rows, by power iteration.
double smoothness_estimate(std::span<const Dataset> shards, double tol = 1e-8);

/// Largest singular value of X.
double operator_norm(const Matrix<double>& X, double tol = 1e-12);

/// (R^2 D / n + R / sqrt(n))^2 with R = ||X||_op: the high-probability bound
/// on ||grad F_i||^2 over a parameter set of diameter D.
double gradient_norm_bound(const Dataset& shard, double diameter);

}  // namespace byzgd

#endif  // BYZGD_PROBLEMS_HPP_
