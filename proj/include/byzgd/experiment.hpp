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

// Runs every configuration of an experiment file, writes one trace per run and
// a summary table after all runs finish.

#ifndef BYZGD_EXPERIMENT_HPP_
#define BYZGD_EXPERIMENT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "byzgd/config.hpp"
#include "byzgd/engine.hpp"

namespace byzgd {

struct RunSummary {
  std::string name;
  double final_dist = 0.0;
  double final_loss = 0.0;
  std::optional<int> iterations_to_threshold;  // nullopt without a target or when never reached
  std::int64_t bits = 0;                       // at the threshold if reached, else at the end
  int byz_caught = 0;                          // summed over rounds
  bool diverged = false;
  std::optional<double> nominal_delta;
  double min_observed_delta = 1.0;
  std::string theory_check;  // "option1", "option2", "error_feedback" or "none"
  double theory_value = 0.0; // threshold on delta, or the error-feedback condition value
  std::string verdict;       // "holds", "fails" or "n/a"
  std::vector<std::string> warnings;
};

RunSummary summarize(const RunConfig& cfg, const RunResult& result, double lambda0 = 1e-2);

std::string format_summary(const std::vector<RunSummary>& rows, TraceFormat format);

struct ExperimentOutcome {
  std::vector<RunConfig> runs;
  std::vector<RunSummary> summaries;
};

/// Runs are spread over `threads` workers; each run is single-threaded so
/// outputs do not depend on the thread count. Writes into file.output_dir
/// (created if missing); throws IoError on write failure.
ExperimentOutcome run_experiment(const ExperimentFile& file, int threads = 1);

}  // namespace byzgd

#endif  // BYZGD_EXPERIMENT_HPP_
