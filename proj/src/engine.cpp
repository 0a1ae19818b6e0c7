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

#include "byzgd/engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace byzgd {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// What one worker contributes to a round.
struct WorkerOutput {
  CompressedMsg msg;
  ParamVector honest_gradient;  // gradient on the uncorrupted shard
  ParamVector sent;             // the vector that was compressed (or sent raw)
};

class Simulation {
 public:
  Simulation(const RunConfig& cfg, const EngineOptions& opts) : cfg_(cfg), opts_(opts) {
    cfg_.validate();
    shards_ = make_shards(cfg_.problem);
    dim_ = shards_.front().param_dim();
    const int m = cfg_.problem.m;
    try {
      cfg_.compressor.validate(dim_);
    } catch (const InvalidInput& e) {
      throw InvalidSpec(std::string("compressor: ") + e.what());
    }

    result_.byzantine = select_byzantine(m, cfg_.alpha, cfg_.seed);
    is_byzantine_.assign(static_cast<std::size_t>(m), false);
    for (int i : result_.byzantine) is_byzantine_[static_cast<std::size_t>(i)] = true;

    worker_shards_ = shards_;
    if (!cfg_.attack.is_gradient_level()) {
      for (int i : result_.byzantine) {
        RandomStream rng = make_stream(cfg_.seed, StreamPurpose::kShardCorruption, static_cast<std::uint64_t>(i));
        worker_shards_[static_cast<std::size_t>(i)] = corrupt_shard(cfg_.attack, shards_[static_cast<std::size_t>(i)], rng);
      }
    }

    if (cfg_.smoothness) {
      result_.smoothness = *cfg_.smoothness;
    } else if (cfg_.problem.kind == ProblemKind::kLeastSquares) {
      result_.smoothness = smoothness_estimate(shards_);
    } else {
      result_.smoothness = kNaN;
    }
    result_.gamma = cfg_.gamma ? *cfg_.gamma : cfg_.gamma_c / result_.smoothness;
    if (!(result_.gamma > 0) || !std::isfinite(result_.gamma)) {
      throw InvalidSpec("gamma must be positive and finite");
    }

    if (cfg_.w0) {
      if (static_cast<Index>(cfg_.w0->size()) != dim_) {
        throw InvalidSpec("w0 has dimension " + std::to_string(cfg_.w0->size()) + ", expected " +
                          std::to_string(dim_));
      }
      w_ = Eigen::Map<const ParamVector>(cfg_.w0->data(), dim_);
    } else {
      w_ = ParamVector::Zero(dim_);
    }
    w_start_ = w_;
    if (cfg_.problem.kind == ProblemKind::kLeastSquares) w_star_ = shards_.front().w_star;

    if (cfg_.alpha > cfg_.aggregator.beta && cfg_.aggregator.is_norm_trim()) {
      result_.warnings.push_back("beta < alpha: trimming cannot remove every Byzantine worker");
    }
    with_norm_ = cfg_.algorithm == Algorithm::kRobustCompressedGd && cfg_.option == TrimOption::kI &&
                 cfg_.aggregator.kind != AggregatorKind::kSignMajority;
    const CompressorSpec wire_spec =
        cfg_.aggregator.kind == AggregatorKind::kSignMajority ? CompressorSpec::sign() : cfg_.compressor;
    result_.bits_per_round = std::int64_t{m} * message_bits(wire_spec, dim_, with_norm_);
    errors_.assign(static_cast<std::size_t>(m), ErrorFeedbackMemory(dim_));
  }

  RunResult run() {
    const int m = cfg_.problem.m;
    for (int t = 0; t < cfg_.T; ++t) {
      std::vector<WorkerOutput> out(static_cast<std::size_t>(m));
      parallel_for(m, opts_.threads, [&](int i) { out[static_cast<std::size_t>(i)] = worker_step(i, t); });

      ParamVector pop_grad = ParamVector::Zero(dim_);
      for (const auto& o : out) pop_grad += o.honest_gradient;
      pop_grad /= static_cast<double>(m);
      record_state(t, pop_grad);
      if (stop_requested()) return finish();
      note_round_diagnostics(t, out);

      std::vector<CompressedMsg> msgs;
      msgs.reserve(out.size());
      for (auto& o : out) msgs.push_back(std::move(o.msg));
      auto [update, trimmed] = aggregate(msgs);

      const bool feedback = cfg_.algorithm == Algorithm::kErrorFeedback;
      const ParamVector estimate = feedback ? ParamVector(update / result_.gamma) : update;
      w_ -= feedback ? update : ParamVector(result_.gamma * update);

      TraceRecord next;
      next.t = t + 1;
      next.trimmed = std::move(trimmed);
      for (int i : next.trimmed) next.byz_caught += is_byzantine_[static_cast<std::size_t>(i)] ? 1 : 0;
      next.cum_bits = std::int64_t{t + 1} * result_.bits_per_round;
      next.delta_norm = (estimate - pop_grad).norm();
      result_.trace.push_back(std::move(next));

      if (!w_.allFinite()) {
        result_.diverged = true;
        result_.warnings.push_back("iterate became non-finite at t=" + std::to_string(t + 1));
        result_.trace.back().dist_to_opt = std::numeric_limits<double>::infinity();
        result_.trace.back().loss = std::numeric_limits<double>::infinity();
        result_.trace.back().grad_norm = std::numeric_limits<double>::infinity();
        return finish();
      }
      check_radius(t + 1);
    }
    record_state(cfg_.T, population_gradient(shards_, w_));
    return finish();
  }

 private:
  WorkerOutput worker_step(int i, int t) {
    const auto ui = static_cast<std::size_t>(i);
    const auto key_i = static_cast<std::uint64_t>(i);
    const auto key_t = static_cast<std::uint64_t>(t);
    WorkerOutput o;
    o.honest_gradient = local_gradient(shards_[ui], w_);
    const bool byzantine = is_byzantine_[ui];
    ParamVector base = byzantine && !cfg_.attack.is_gradient_level() ? local_gradient(worker_shards_[ui], w_)
                                                                     : o.honest_gradient;
    if (byzantine && cfg_.attack.is_gradient_level()) {
      RandomStream attack_rng = make_stream(cfg_.seed, StreamPurpose::kAttack, key_i, key_t);
      base = corrupt_gradient(cfg_.attack, base, attack_rng);
    }
    RandomStream rng = make_stream(cfg_.seed, StreamPurpose::kCompression, key_i, key_t);
    const bool gradient_attack = byzantine && cfg_.attack.kind != AttackKind::kNone && cfg_.attack.is_gradient_level();

    if (cfg_.aggregator.kind == AggregatorKind::kSignMajority) {
      o.sent = std::move(base);
      o.msg = compress(CompressorSpec::sign(), o.sent);
      return o;
    }

    if (cfg_.algorithm == Algorithm::kRobustCompressedGd) {
      o.sent = std::move(base);
      if (gradient_attack && cfg_.option == TrimOption::kII) {
        o.msg = raw_message(o.sent);
      } else {
        o.msg = compress(cfg_.compressor, o.sent, &rng);
        if (with_norm_) attach_norm(o.msg, o.sent.norm());
      }
      return o;
    }

    // Error feedback: Byzantine workers keep no memory and send gamma * (their
    // vector) uncompressed; honest workers compress p_i and keep the residual.
    if (byzantine) {
      o.sent = result_.gamma * base;
      o.msg = raw_message(o.sent);
      return o;
    }
    o.msg = errors_[ui].step(cfg_.compressor, result_.gamma, base, &rng, &o.sent);
    return o;
  }

  CompressedMsg raw_message(const ParamVector& v) const {
    CompressedMsg msg;
    msg.kind = CompressorKind::kNone;
    msg.dim = dim_;
    msg.payload = DensePayload{v};
    msg.bits = message_bits(cfg_.compressor, dim_, with_norm_);
    return msg;
  }

  std::pair<ParamVector, std::vector<int>> aggregate(const std::vector<CompressedMsg>& msgs) const {
    const auto& agg = cfg_.aggregator;
    switch (agg.kind) {
      case AggregatorKind::kNormTrimOptionI:
      case AggregatorKind::kNormTrimOptionII: {
        const TrimOption key = cfg_.algorithm == Algorithm::kErrorFeedback ? TrimOption::kII : cfg_.option;
        TrimOutcome outcome = norm_trim(msgs, agg, key);
        return {std::move(outcome.update), std::move(outcome.trimmed)};
      }
      case AggregatorKind::kVanillaMean:
        return {vanilla_mean(msgs), {}};
      case AggregatorKind::kCoordTrimmedMean:
        return {coord_trimmed_mean(decode_columns(msgs), agg.beta), {}};
      case AggregatorKind::kSignMajority:
        return {sign_majority(msgs), {}};
    }
    throw InvalidSpec("unhandled aggregator");
  }

  void record_state(int t, const ParamVector& pop_grad) {
    if (t == 0) {
      TraceRecord first;
      first.delta_norm = kNaN;
      result_.trace.push_back(std::move(first));
    }
    TraceRecord& rec = result_.trace.back();
    rec.dist_to_opt = w_star_.size() == w_.size() ? (w_ - w_star_).norm() : kNaN;
    rec.loss = population_loss(shards_, w_);
    rec.grad_norm = pop_grad.norm();
  }

  bool stop_requested() const {
    return opts_.stop_at_dist && result_.trace.back().dist_to_opt <= *opts_.stop_at_dist;
  }

  void note_round_diagnostics(int t, const std::vector<WorkerOutput>& out) {
    RoundDiagnostics diag;
    diag.t = t;
    ParamVector mean_error = ParamVector::Zero(dim_);
    int honest = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (is_byzantine_[i]) continue;
      ++honest;
      diag.max_honest_grad_sq = std::max(diag.max_honest_grad_sq, out[i].honest_gradient.squaredNorm());
      if (cfg_.algorithm == Algorithm::kErrorFeedback) {
        // errors_ already holds e_i(t+1); e_i(t) = sent - gamma g_i.
        diag.max_honest_error_sq = std::max(diag.max_honest_error_sq, errors_[i].error().squaredNorm());
        mean_error += out[i].sent - result_.gamma * out[i].honest_gradient;
      }
      if (out[i].sent.squaredNorm() > 0 && out[i].msg.kind == cfg_.compressor.kind) {
        const double delta = 1.0 - relative_distortion(decompress(out[i].msg), out[i].sent);
        diag.min_honest_delta = std::min(diag.min_honest_delta, delta);
      }
    }
    running_grad_sq_ = std::max(running_grad_sq_, diag.max_honest_grad_sq);
    diag.running_grad_sq = running_grad_sq_;
    if (cfg_.algorithm == Algorithm::kErrorFeedback && honest > 0 && w_star_.size() == w_.size()) {
      diag.aux_dist = (w_ - mean_error / honest - w_star_).norm();
    } else {
      diag.aux_dist = kNaN;
    }
    result_.diagnostics.push_back(diag);
  }

  void check_radius(int t) {
    if (!cfg_.radius || radius_warned_) return;
    if ((w_ - w_start_).norm() > *cfg_.radius) {
      radius_warned_ = true;
      std::ostringstream msg;
      msg << "||w_t - w_0|| exceeded radius " << *cfg_.radius << " at t=" << t;
      result_.warnings.push_back(msg.str());
    }
  }

  RunResult finish() {
    result_.final_w = w_;
    return std::move(result_);
  }

  RunConfig cfg_;
  EngineOptions opts_;
  std::vector<Dataset> shards_;
  std::vector<Dataset> worker_shards_;
  std::vector<bool> is_byzantine_;
  std::vector<ErrorFeedbackMemory> errors_;
  Index dim_ = 0;
  ParamVector w_;
  ParamVector w_start_;
  ParamVector w_star_;
  bool with_norm_ = false;
  bool radius_warned_ = false;
  double running_grad_sq_ = 0.0;
  RunResult result_;
};

}  // namespace

CompressedMsg ErrorFeedbackMemory::step(const CompressorSpec& spec, double gamma,
                                        const ParamVector& gradient, RandomStream* rng,
                                        ParamVector* p_out) {
  ParamVector p = gamma * gradient + error_;
  CompressedMsg msg = compress(spec, p, rng);
  error_ = p - decompress(msg);
  if (p_out) *p_out = std::move(p);
  return msg;
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kRobustCompressedGd ? "robust_gd" : "error_feedback";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "robust_gd") return Algorithm::kRobustCompressedGd;
  if (name == "error_feedback") return Algorithm::kErrorFeedback;
  throw InvalidSpec("unknown algorithm '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  problem.validate();
  aggregator.validate();
  attack.validate();
  if (!(alpha >= 0 && alpha <= 0.5)) throw InvalidSpec("alpha must lie in [0, 1/2]");
  if (T < 1) throw InvalidSpec("T must be >= 1");
  if (gamma && !(*gamma > 0)) throw InvalidSpec("gamma must be > 0");
  if (!(gamma_c > 0)) throw InvalidSpec("gamma_c must be > 0");
  if (smoothness && !(*smoothness > 0)) throw InvalidSpec("smoothness must be > 0");
  if (target_dist && !(*target_dist >= 0)) throw InvalidSpec("target_dist must be >= 0");
  if (radius && !(*radius > 0)) throw InvalidSpec("radius must be > 0");
  if (!gamma && !smoothness && problem.kind != ProblemKind::kLeastSquares) {
    throw InvalidSpec("automatic gamma needs a configured smoothness for this problem");
  }
  if (aggregator.kind == AggregatorKind::kNormTrimOptionI && option != TrimOption::kI) {
    throw InvalidSpec("aggregator norm_trim_1 requires option 1");
  }
  if (aggregator.kind == AggregatorKind::kNormTrimOptionII && option != TrimOption::kII) {
    throw InvalidSpec("aggregator norm_trim_2 requires option 2");
  }
  const bool sign_vote = aggregator.kind == AggregatorKind::kSignMajority;
  if (sign_vote != (compressor.kind == CompressorKind::kSign)) {
    throw InvalidSpec("the sign compressor pairs only with the sign_majority aggregator");
  }
  if (algorithm == Algorithm::kErrorFeedback) {
    if (sign_vote) throw InvalidSpec("error feedback does not support sign_majority");
    if (option != TrimOption::kII) {
      throw InvalidSpec("error feedback sorts by center-computed norms and requires option 2");
    }
  }
  if (!attack.is_gradient_level()) {
    if (problem.kind != ProblemKind::kLogisticSoftmax) {
      throw InvalidSpec("label attacks require the logistic problem");
    }
    if (attack.kind == AttackKind::kLabelShift && attack.num_classes != problem.num_classes) {
      throw InvalidSpec("attack.num_classes must equal problem.num_classes");
    }
  }
}

RunResult run_alg1(const RunConfig& cfg, const EngineOptions& opts) {
  RunConfig c = cfg;
  c.algorithm = Algorithm::kRobustCompressedGd;
  return Simulation(c, opts).run();
}

RunResult run_alg2(const RunConfig& cfg, const EngineOptions& opts) {
  RunConfig c = cfg;
  c.algorithm = Algorithm::kErrorFeedback;
  return Simulation(c, opts).run();
}

RunResult run(const RunConfig& cfg, const EngineOptions& opts) {
  return Simulation(cfg, opts).run();
}

ThresholdResult run_to_threshold(const RunConfig& cfg, double target_dist, EngineOptions opts) {
  if (cfg.problem.kind != ProblemKind::kLeastSquares) {
    throw UnsupportedOperation("iterations-to-threshold needs a regression problem with known w*");
  }
  opts.stop_at_dist = target_dist;
  ThresholdResult out;
  out.run = run(cfg, opts);
  const TraceRecord& last = out.run.trace.back();
  out.converged = last.dist_to_opt <= target_dist;
  out.iterations = last.t;
  out.bits = last.cum_bits;
  return out;
}

}  // namespace byzgd
