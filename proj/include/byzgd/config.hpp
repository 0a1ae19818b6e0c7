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

// JSON experiment files.
//
// Field names mirror the C++ structs. Unknown fields are rejected so that a
// typo such as "aplha" fails loudly instead of silently running alpha = 0.

#ifndef BYZGD_CONFIG_HPP_
#define BYZGD_CONFIG_HPP_

#include <optional>
#include <string>
#include <vector>

#include "byzgd/engine.hpp"
#include "json.hpp"

namespace byzgd {

enum class TraceFormat { kCsv, kJson };

std::string_view to_string(TraceFormat format);
TraceFormat trace_format_from_string(std::string_view name);

/// Cross product over the listed axes applied to `base`. Empty axes keep the
/// base value.
struct SweepSpec {
  RunConfig base;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<CompressorSpec> compressor;
  std::vector<AttackSpec> attack;
  std::vector<AggregatorSpec> aggregator;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentFile {
  std::string output_dir = "out";
  TraceFormat format = TraceFormat::kCsv;
  int max_runs = 256;
  std::vector<RunConfig> runs;
  std::optional<SweepSpec> sweep;

  friend bool operator==(const ExperimentFile&, const ExperimentFile&) = default;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentFile& file);
ExperimentFile experiment_from_json(const nlohmann::json& j);

/// Parses and validates; throws InvalidSpec with the offending field path.
ExperimentFile parse_experiment(const std::string& text);
ExperimentFile load_experiment(const std::string& path);

/// Named runs followed by the sweep cross product, each validated. Throws
/// InvalidSpec on duplicate names or when the count exceeds max_runs.
std::vector<RunConfig> expand_runs(const ExperimentFile& file);

}  // namespace byzgd

#endif  // BYZGD_CONFIG_HPP_
