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

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "byzgd/common.hpp"
#include "byzgd/compressors.hpp"
#include "byzgd/config.hpp"
#include "byzgd/experiment.hpp"
#include "byzgd/theory.hpp"
#include "byzgd/trace_io.hpp"

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitIo = 3;

int sweep_threads() {
  const char* env = std::getenv("BYZGD_THREADS");
  if (env == nullptr) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    return 1;
  }
}

int cmd_run(const std::string& path) {
  const byzgd::ExperimentFile file = byzgd::load_experiment(path);
  const auto outcome = byzgd::run_experiment(file, sweep_threads());
  for (const auto& s : outcome.summaries) {
    std::cout << s.name << ": final_dist=" << byzgd::format_double(s.final_dist)
              << " iterations_to_threshold="
              << (s.iterations_to_threshold ? std::to_string(*s.iterations_to_threshold) : "-")
              << " bits=" << s.bits << " theory[" << s.theory_check << "]=" << s.verdict << '\n';
    for (const auto& w : s.warnings) std::cerr << "warning: " << s.name << ": " << w << '\n';
  }
  std::cout << "wrote " << outcome.summaries.size() << " trace(s) and summary to "
            << file.output_dir << " (theory verdicts up to c_univ)\n";
  return 0;
}

int cmd_check(double alpha, double beta, double delta, const std::string& option, double lambda0) {
  namespace th = byzgd::theory;
  if (!(alpha >= 0 && beta >= 0 && beta < 1 && delta > 0 && delta <= 1 && lambda0 >= 0)) {
    throw byzgd::InvalidSpec("need alpha, beta in [0, 1), delta in (0, 1], lambda0 >= 0");
  }
  std::cout << "alpha=" << alpha << " beta=" << beta << " delta=" << delta
            << " lambda0=" << lambda0 << '\n';
  if (alpha > beta) std::cout << "note: beta < alpha, trimming under-estimates the adversary\n";
  if (option == "1" || option == "2") {
    const double thr = option == "1" ? th::delta_threshold_option1(alpha, beta, lambda0)
                                     : th::delta_threshold_option2(alpha, beta, lambda0);
    const bool ok = delta > thr;
    std::cout << "option " << option << " threshold: delta > " << byzgd::format_double(thr) << '\n'
              << "verdict: " << (ok ? "holds" : "fails")
              << " (margin " << byzgd::format_double(delta - thr) << ")\n";
    return 0;
  }
  const auto ef = th::ef_condition(alpha, beta, delta);
  std::cout << "error-feedback condition: " << byzgd::format_double(ef.value) << " < "
            << th::kEfConditionLimit << '\n'
            << "verdict: " << (ef.satisfied ? "holds" : "fails") << " (margin "
            << byzgd::format_double(ef.margin) << ")\n";
  return 0;
}

int cmd_bits(const std::string& name, long d, int k, int s, bool with_norm) {
  byzgd::CompressorSpec spec;
  spec.kind = byzgd::compressor_kind_from_string(name);
  spec.k = k;
  spec.s = s;
  try {
    spec.validate(d);
  } catch (const byzgd::InvalidInput& e) {
    throw byzgd::InvalidSpec(e.what());
  }
  const auto bits = byzgd::message_bits(spec, d, with_norm);
  std::cout << "compressor=" << name << " d=" << d << (with_norm ? " +norm" : "") << '\n'
            << "message bits: " << bits << '\n'
            << "wire padding bits: " << byzgd::wire_padding_bits(spec, d) << '\n'
            << "uncompressed bits: " << byzgd::message_bits(byzgd::CompressorSpec::none(), d, with_norm)
            << '\n';
  if (auto delta = byzgd::nominal_delta(spec, d)) {
    std::cout << "nominal delta: " << byzgd::format_double(*delta) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust compressed gradient descent simulator"};
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "run an experiment file");
  run->add_option("file", run_path, "JSON experiment file")->required();

  double alpha = 0, beta = 0, delta = 1, lambda0 = 1e-2;
  std::string option = "1";
  auto* check = app.add_subcommand("check", "evaluate the delta-alpha feasibility conditions");
  check->add_option("--alpha", alpha)->required();
  check->add_option("--beta", beta)->required();
  check->add_option("--delta", delta)->required();
  check->add_option("--option", option)->check(CLI::IsMember({"1", "2", "ef"}))->required();
  check->add_option("--lambda0", lambda0, "positive slack constant")->capture_default_str();

  std::string compressor;
  long d = 0;
  int k = 0, s = 0;
  bool with_norm = false;
  auto* bits = app.add_subcommand("bits", "bits per message for a compressor");
  bits->add_option("--compressor", compressor)->required();
  bits->add_option("--d", d)->required();
  bits->add_option("--k", k);
  bits->add_option("--s", s);
  bits->add_flag("--with-norm", with_norm);

  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidConfig;
  }

  try {
    if (*run) return cmd_run(run_path);
    if (*check) return cmd_check(alpha, beta, delta, option, lambda0);
    if (*bits) return cmd_bits(compressor, d, k, s, with_norm);
    if (*version) {
      std::cout << "byzgd " << byzgd::kVersion << '\n';
      return 0;
    }
  } catch (const byzgd::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
