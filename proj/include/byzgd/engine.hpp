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

// Robust compressed gradient descent and its error-feedback variant on a
// simulated parameter server.
//
// Every round the center broadcasts w_t, each worker computes its full local
// gradient and sends one message, and the center aggregates and steps.
// Honest workers are identical across configurations that differ only in the
// attack; all randomness comes from streams keyed by (seed, worker, round), so
// the worker phase may run on any number of threads with identical results.

#ifndef BYZGD_ENGINE_HPP_
#define BYZGD_ENGINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "byzgd/aggregation.hpp"
#include "byzgd/byzantine.hpp"
#include "byzgd/compressors.hpp"
#include "byzgd/problems.hpp"

namespace byzgd {

enum class Algorithm {
  kRobustCompressedGd,  // w+ = w - (gamma/|U|) sum_U Q(grad F_i)
  kErrorFeedback,       // p_i = gamma grad F_i + e_i, w+ = w - (1/|U|) sum_U Q(p_i)
};

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

struct RunConfig {
  std::string name = "run";
  Algorithm algorithm = Algorithm::kRobustCompressedGd;
  ProblemSpec problem;
  CompressorSpec compressor;
  AggregatorSpec aggregator;
  TrimOption option = TrimOption::kI;
  double alpha = 0.0;
  AttackSpec attack;
  std::optional<double> gamma;  // nullopt: gamma_c / L_F
  double gamma_c = 0.5;
  std::optional<double> smoothness;  // L_F; estimated for least squares when absent
  int T = 100;
  std::optional<std::vector<double>> w0;  // zero when absent
  std::uint64_t seed = 0;
  std::optional<double> target_dist;
  std::optional<double> radius;  // warn when ||w_t - w_0|| exceeds it

  /// Throws InvalidSpec naming the first violated invariant.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// State at w_t plus the aggregation round that produced it (empty for t = 0).
struct TraceRecord {
  int t = 0;
  double dist_to_opt = 0.0;  // NaN when w* is unknown
  double loss = 0.0;
  double grad_norm = 0.0;
  std::vector<int> trimmed;
  int byz_caught = 0;
  std::int64_t cum_bits = 0;
  double delta_norm = 0.0;  // ||g(w_{t-1}) - grad F(w_{t-1})||, NaN at t = 0

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Per-round quantities that back the theory checks.
struct RoundDiagnostics {
  int t = 0;
  double max_honest_grad_sq = 0.0;      // max_i ||grad F_i(w_t)||^2 over honest i
  double running_grad_sq = 0.0;         // max over rounds s <= t of the above
  double max_honest_error_sq = 0.0;     // max_i ||e_i(t+1)||^2, error feedback only
  double aux_dist = 0.0;                // ||w~_t - w*||, error feedback only
  double min_honest_delta = 1.0;        // smallest measured delta among honest messages
};

struct RunResult {
  std::vector<TraceRecord> trace;
  ParamVector final_w;
  std::vector<int> byzantine;
  std::vector<RoundDiagnostics> diagnostics;
  std::vector<std::string> warnings;
  double gamma = 0.0;
  double smoothness = 0.0;  // NaN when neither configured nor estimable
  std::int64_t bits_per_round = 0;
  bool diverged = false;
};

struct EngineOptions {
  int threads = 1;
  std::optional<double> stop_at_dist;  // end the run once dist_to_opt <= this
};

/// One honest worker's error-feedback memory: forms p = gamma g + e, sends
/// Q(p) and keeps e = p - Q(p). Starts at zero.
class ErrorFeedbackMemory {
 public:
  explicit ErrorFeedbackMemory(Index d) : error_(ParamVector::Zero(d)) {}

  CompressedMsg step(const CompressorSpec& spec, double gamma, const ParamVector& gradient,
                     RandomStream* rng = nullptr, ParamVector* p_out = nullptr);
  const ParamVector& error() const { return error_; }

 private:
  ParamVector error_;
};

RunResult run_alg1(const RunConfig& cfg, const EngineOptions& opts = {});
RunResult run_alg2(const RunConfig& cfg, const EngineOptions& opts = {});

/// Dispatches on cfg.algorithm.
RunResult run(const RunConfig& cfg, const EngineOptions& opts = {});

struct ThresholdResult {
  bool converged = false;
  int iterations = 0;       // first t with dist_to_opt <= target, else T
  std::int64_t bits = 0;    // cumulative bits at that record
  RunResult run;
};

ThresholdResult run_to_threshold(const RunConfig& cfg, double target_dist,
                                 EngineOptions opts = {});

}  // namespace byzgd

#endif  // BYZGD_ENGINE_HPP_
