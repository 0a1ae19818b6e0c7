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

#include <cmath>
#include <fstream>
#include <sstream>

namespace byzgd {
namespace {

void check_dims(const Dataset& shard, const ParamVector& w) {
  if (w.size() != shard.param_dim()) {
    throw InvalidInput("parameter dimension " + std::to_string(w.size()) +
                       " does not match problem dimension " + std::to_string(shard.param_dim()));
  }
}

Matrix<double> softmax_rows(const Matrix<double>& logits) {
  Matrix<double> p = logits;
  for (Index r = 0; r < p.rows(); ++r) {
    p.row(r).array() -= p.row(r).maxCoeff();
    p.row(r) = p.row(r).array().exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

Eigen::Map<const Matrix<double>> as_weights(const Dataset& shard, const ParamVector& w) {
  return {w.data(), shard.features(), shard.num_classes};
}

double power_iteration(const Matrix<double>& gram, double tol) {
  const Index d = gram.rows();
  ParamVector v = ParamVector::Ones(d) / std::sqrt(static_cast<double>(d));
  double lambda = v.dot(gram * v);
  for (int iter = 0; iter < 100000; ++iter) {
    ParamVector next = gram * v;
    const double norm = next.norm();
    if (norm == 0) return 0.0;
    next /= norm;
    const double updated = next.dot(gram * next);
    v = std::move(next);
    if (std::abs(updated - lambda) <= tol * std::max(1.0, std::abs(updated))) {
      return updated;
    }
    lambda = updated;
  }
  return lambda;
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  return kind == ProblemKind::kLeastSquares ? "least_squares" : "logistic";
}

ProblemKind problem_kind_from_string(std::string_view name) {
  if (name == "least_squares") return ProblemKind::kLeastSquares;
  if (name == "logistic") return ProblemKind::kLogisticSoftmax;
  throw InvalidSpec("unknown problem kind '" + std::string(name) + "'");
}

void ProblemSpec::validate() const {
  if (m < 1) throw InvalidSpec("problem.m must be >= 1");
  if (noise_std < 0) throw InvalidSpec("problem.noise_std must be >= 0");
  if (kind == ProblemKind::kLogisticSoftmax && num_classes < 2) {
    throw InvalidSpec("problem.num_classes must be >= 2");
  }
  if (csv_path) return;
  if (d <= 0) throw InvalidSpec("problem.d must be positive");
  if (N < m) throw InvalidSpec("problem.N must be >= problem.m");
}

std::vector<Dataset> shard(const Dataset& pooled, int m) {
  if (m < 1 || pooled.n() < m) throw InvalidSpec("need at least one row per worker");
  std::vector<Dataset> shards;
  shards.reserve(static_cast<std::size_t>(m));
  const Index base = pooled.n() / m;
  const Index extra = pooled.n() % m;
  Index row = 0;
  for (int i = 0; i < m; ++i) {
    const Index rows = base + (i < extra ? 1 : 0);
    Dataset part;
    part.kind = pooled.kind;
    part.num_classes = pooled.num_classes;
    part.X = pooled.X.middleRows(row, rows);
    part.y = pooled.y.segment(row, rows);
    part.w_star = pooled.w_star;
    shards.push_back(std::move(part));
    row += rows;
  }
  return shards;
}

std::vector<Dataset> generate(const ProblemSpec& spec) {
  spec.validate();
  if (spec.csv_path) throw InvalidSpec("generate() does not read CSV data; use make_shards()");
  RandomStream rng = make_stream(spec.seed, StreamPurpose::kDataGeneration);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] { return normal(rng); };

  Dataset pooled;
  pooled.kind = spec.kind;
  pooled.X = Matrix<double>::NullaryExpr(spec.N, spec.d, draw);
  if (spec.kind == ProblemKind::kLeastSquares) {
    pooled.w_star = ParamVector::NullaryExpr(spec.d, draw);
    pooled.y = pooled.X * pooled.w_star;
    if (spec.noise_std > 0) {
      pooled.y += spec.noise_std * ParamVector::NullaryExpr(spec.N, draw);
    }
  } else {
    const int K = spec.num_classes;
    pooled.num_classes = K;
    pooled.w_star = ParamVector::NullaryExpr(spec.d * K, draw);
    Matrix<double> logits = pooled.X * Eigen::Map<const Matrix<double>>(pooled.w_star.data(), spec.d, K);
    if (spec.noise_std > 0) {
      logits += spec.noise_std * Matrix<double>::NullaryExpr(spec.N, K, draw);
    }
    pooled.y.resize(spec.N);
    for (Index r = 0; r < spec.N; ++r) {
      Index label;
      logits.row(r).maxCoeff(&label);
      pooled.y(r) = static_cast<double>(label);
    }
  }
  return shard(pooled, spec.m);
}

Dataset load_csv(const std::string& path, ProblemKind kind, int num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidSpec("data file " + path + " is empty");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidSpec("non-numeric cell '" + cell + "' in " + path);
      }
    }
    if (row.size() < 2) throw InvalidSpec("each data row needs features and a label");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidSpec("ragged row in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidSpec("data file " + path + " has no samples");

  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(rows.front().size()) - 1;
  Dataset data;
  data.kind = kind;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < d; ++c) data.X(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    data.y(r) = rows[static_cast<std::size_t>(r)].back();
  }
  if (kind == ProblemKind::kLeastSquares) {
    data.w_star = data.X.colPivHouseholderQr().solve(data.y);
  } else {
    data.num_classes = num_classes;
    for (Index r = 0; r < n; ++r) {
      const double label = data.y(r);
      if (label != std::floor(label) || label < 0 || label >= num_classes) {
        throw InvalidSpec("label out of range in " + path);
      }
    }
  }
  return data;
}

std::vector<Dataset> make_shards(const ProblemSpec& spec) {
  spec.validate();
  if (!spec.csv_path) return generate(spec);
  Dataset pooled = load_csv(*spec.csv_path, spec.kind, spec.num_classes);
  if ((spec.N != 0 && spec.N != pooled.n()) || (spec.d != 0 && spec.d != pooled.features())) {
    throw InvalidSpec("problem.N/d do not match " + *spec.csv_path);
  }
  return shard(pooled, spec.m);
}

double local_loss(const Dataset& shard, const ParamVector& w) {
  check_dims(shard, w);
  const auto n = static_cast<double>(shard.n());
  if (shard.kind == ProblemKind::kLeastSquares) {
    return 0.5 * (shard.X * w - shard.y).squaredNorm() / n;
  }
  const Matrix<double> logits = shard.X * as_weights(shard, w);
  double total = 0.0;
  for (Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    const double log_sum = peak + std::log((logits.row(r).array() - peak).exp().sum());
    total += log_sum - logits(r, static_cast<Index>(shard.y(r)));
  }
  return total / n;
}

ParamVector local_gradient(const Dataset& shard, const ParamVector& w) {
  check_dims(shard, w);
  const auto n = static_cast<double>(shard.n());
  if (shard.kind == ProblemKind::kLeastSquares) {
    return shard.X.transpose() * (shard.X * w - shard.y) / n;
  }
  Matrix<double> residual = softmax_rows(shard.X * as_weights(shard, w));
  for (Index r = 0; r < residual.rows(); ++r) residual(r, static_cast<Index>(shard.y(r))) -= 1.0;
  const Matrix<double> grad = shard.X.transpose() * residual / n;
  return Eigen::Map<const ParamVector>(grad.data(), grad.size());
}

double population_loss(std::span<const Dataset> shards, const ParamVector& w) {
  if (shards.empty()) throw InvalidInput("no shards");
  double total = 0.0;
  for (const auto& s : shards) total += local_loss(s, w);
  return total / static_cast<double>(shards.size());
}

ParamVector population_gradient(std::span<const Dataset> shards, const ParamVector& w) {
  if (shards.empty()) throw InvalidInput("no shards");
  ParamVector total = ParamVector::Zero(w.size());
  for (const auto& s : shards) total += local_gradient(s, w);
  return total / static_cast<double>(shards.size());
}

double smoothness_estimate(std::span<const Dataset> shards, double tol) {
  if (shards.empty()) throw InvalidInput("no shards");
  if (shards.front().kind != ProblemKind::kLeastSquares) {
    throw UnsupportedOperation("smoothness estimate is only defined for least squares");
  }
  const Index d = shards.front().features();
  Matrix<double> gram = Matrix<double>::Zero(d, d);
  Index total_rows = 0;
  for (const auto& s : shards) {
    gram.noalias() += s.X.transpose() * s.X;
    total_rows += s.n();
  }
  gram /= static_cast<double>(total_rows);
  return power_iteration(gram, tol);
}

double operator_norm(const Matrix<double>& X, double tol) {
  if (X.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, power_iteration(X.transpose() * X, tol)));
}

double gradient_norm_bound(const Dataset& shard, double diameter) {
  const auto n = static_cast<double>(shard.n());
  const double R = operator_norm(shard.X);
  const double root = R * R * diameter / n + R / std::sqrt(n);
  return root * root;
}

}  // namespace byzgd
