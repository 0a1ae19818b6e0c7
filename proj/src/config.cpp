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

#include "byzgd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace byzgd {
namespace {

using nlohmann::json;

// Reads fields of one JSON object and reports any left unread.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (auto it = find(key)) out = convert<T>(**it, key);
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (auto it = find(key); it && !(*it)->is_null()) out = convert<T>(**it, key);
  }

  const json* child(const char* key) {
    auto it = find(key);
    return it ? &**it : nullptr;
  }

  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(path(key.c_str()), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw InvalidSpec((where.empty() ? std::string("<root>") : where) + ": " + what);
  }

 private:
  std::optional<json::const_iterator> find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return it;
  }

  template <typename T>
  T convert(const json& value, const char* key) const {
    try {
      if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer()) fail(path(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) fail(path(key), "expected a number");
      }
      return value.get<T>();
    } catch (const json::exception& e) {
      fail(path(key), e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto with_path(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    Fields::fail(where, e.what());
  }
}

json to_json(const ProblemSpec& p) {
  json j = {{"kind", to_string(p.kind)}, {"N", p.N},         {"d", p.d},
            {"m", p.m},                  {"noise_std", p.noise_std}, {"seed", p.seed},
            {"num_classes", p.num_classes}};
  if (p.csv_path) j["csv_path"] = *p.csv_path;
  return j;
}

ProblemSpec problem_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  ProblemSpec p;
  std::string kind = std::string(to_string(p.kind));
  f.read("kind", kind);
  p.kind = with_path(f.path("kind"), [&] { return problem_kind_from_string(kind); });
  f.read("N", p.N);
  f.read("d", p.d);
  f.read("m", p.m);
  f.read("noise_std", p.noise_std);
  f.read("seed", p.seed);
  f.read("num_classes", p.num_classes);
  f.read("csv_path", p.csv_path);
  f.finish();
  return p;
}

json to_json(const CompressorSpec& c) {
  return {{"kind", to_string(c.kind)}, {"k", c.k}, {"s", c.s}};
}

CompressorSpec compressor_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  CompressorSpec c;
  std::string kind = std::string(to_string(c.kind));
  f.read("kind", kind);
  c.kind = with_path(f.path("kind"), [&] { return compressor_kind_from_string(kind); });
  f.read("k", c.k);
  f.read("s", c.s);
  f.finish();
  return c;
}

json to_json(const AggregatorSpec& a) { return {{"kind", to_string(a.kind)}, {"beta", a.beta}}; }

AggregatorSpec aggregator_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  AggregatorSpec a;
  std::string kind = std::string(to_string(a.kind));
  f.read("kind", kind);
  a.kind = with_path(f.path("kind"), [&] { return aggregator_kind_from_string(kind); });
  f.read("beta", a.beta);
  f.finish();
  return a;
}

json to_json(const AttackSpec& a) {
  return {{"kind", to_string(a.kind)},
          {"noise_var", a.noise_var},
          {"eps", a.eps},
          {"num_classes", a.num_classes}};
}

AttackSpec attack_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  AttackSpec a;
  std::string kind = std::string(to_string(a.kind));
  f.read("kind", kind);
  a.kind = with_path(f.path("kind"), [&] { return attack_kind_from_string(kind); });
  f.read("noise_var", a.noise_var);
  f.read("eps", a.eps);
  f.read("num_classes", a.num_classes);
  f.finish();
  return a;
}

RunConfig run_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  RunConfig cfg;
  f.read("name", cfg.name);
  std::string algorithm = std::string(to_string(cfg.algorithm));
  f.read("algorithm", algorithm);
  cfg.algorithm = with_path(f.path("algorithm"), [&] { return algorithm_from_string(algorithm); });
  if (const json* c = f.child("problem")) cfg.problem = problem_from_json(*c, f.path("problem"));
  if (const json* c = f.child("compressor")) {
    cfg.compressor = compressor_from_json(*c, f.path("compressor"));
  }
  if (const json* c = f.child("aggregator")) {
    cfg.aggregator = aggregator_from_json(*c, f.path("aggregator"));
  }
  int option = cfg.option == TrimOption::kI ? 1 : 2;
  f.read("option", option);
  if (option != 1 && option != 2) Fields::fail(f.path("option"), "must be 1 or 2");
  cfg.option = option == 1 ? TrimOption::kI : TrimOption::kII;
  f.read("alpha", cfg.alpha);
  if (const json* c = f.child("attack")) cfg.attack = attack_from_json(*c, f.path("attack"));
  f.read("gamma", cfg.gamma);
  f.read("gamma_c", cfg.gamma_c);
  f.read("smoothness", cfg.smoothness);
  f.read("T", cfg.T);
  f.read("w0", cfg.w0);
  f.read("seed", cfg.seed);
  f.read("target_dist", cfg.target_dist);
  f.read("radius", cfg.radius);
  f.finish();
  return cfg;
}

template <typename T, typename Parse>
std::vector<T> list_from_json(const json& j, const std::string& where, Parse&& parse) {
  if (!j.is_array()) Fields::fail(where, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SweepSpec sweep_from_json(const json& j, const std::string& where) {
  Fields f(j, where);
  SweepSpec s;
  if (const json* c = f.child("base")) s.base = run_from_json(*c, f.path("base"));
  f.read("alpha", s.alpha);
  f.read("beta", s.beta);
  if (const json* c = f.child("compressor")) {
    s.compressor = list_from_json<CompressorSpec>(*c, f.path("compressor"), compressor_from_json);
  }
  if (const json* c = f.child("attack")) {
    s.attack = list_from_json<AttackSpec>(*c, f.path("attack"), attack_from_json);
  }
  if (const json* c = f.child("aggregator")) {
    s.aggregator = list_from_json<AggregatorSpec>(*c, f.path("aggregator"), aggregator_from_json);
  }
  f.finish();
  return s;
}

std::string short_number(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

}  // namespace

std::string_view to_string(TraceFormat format) {
  return format == TraceFormat::kCsv ? "csv" : "json";
}

TraceFormat trace_format_from_string(std::string_view name) {
  if (name == "csv") return TraceFormat::kCsv;
  if (name == "json") return TraceFormat::kJson;
  throw InvalidSpec("unknown trace format '" + std::string(name) + "'");
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j = {{"name", cfg.name},
            {"algorithm", to_string(cfg.algorithm)},
            {"problem", to_json(cfg.problem)},
            {"compressor", to_json(cfg.compressor)},
            {"aggregator", to_json(cfg.aggregator)},
            {"option", cfg.option == TrimOption::kI ? 1 : 2},
            {"alpha", cfg.alpha},
            {"attack", to_json(cfg.attack)},
            {"gamma_c", cfg.gamma_c},
            {"T", cfg.T},
            {"seed", cfg.seed}};
  if (cfg.gamma) j["gamma"] = *cfg.gamma;
  if (cfg.smoothness) j["smoothness"] = *cfg.smoothness;
  if (cfg.w0) j["w0"] = *cfg.w0;
  if (cfg.target_dist) j["target_dist"] = *cfg.target_dist;
  if (cfg.radius) j["radius"] = *cfg.radius;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) { return run_from_json(j, ""); }

nlohmann::json to_json(const ExperimentFile& file) {
  json j = {{"output_dir", file.output_dir},
            {"format", to_string(file.format)},
            {"max_runs", file.max_runs},
            {"runs", json::array()}};
  for (const auto& r : file.runs) j["runs"].push_back(to_json(r));
  if (file.sweep) {
    const SweepSpec& s = *file.sweep;
    json sj = {{"base", to_json(s.base)}, {"alpha", s.alpha}, {"beta", s.beta}};
    sj["compressor"] = json::array();
    for (const auto& c : s.compressor) sj["compressor"].push_back(to_json(c));
    sj["attack"] = json::array();
    for (const auto& a : s.attack) sj["attack"].push_back(to_json(a));
    sj["aggregator"] = json::array();
    for (const auto& a : s.aggregator) sj["aggregator"].push_back(to_json(a));
    j["sweep"] = std::move(sj);
  }
  return j;
}

ExperimentFile experiment_from_json(const nlohmann::json& j) {
  Fields f(j, "");
  ExperimentFile file;
  f.read("output_dir", file.output_dir);
  std::string format = std::string(to_string(file.format));
  f.read("format", format);
  file.format = with_path("format", [&] { return trace_format_from_string(format); });
  f.read("max_runs", file.max_runs);
  if (file.max_runs < 1) Fields::fail("max_runs", "must be >= 1");
  if (const json* c = f.child("runs")) {
    file.runs = list_from_json<RunConfig>(*c, "runs", run_from_json);
  }
  if (const json* c = f.child("sweep")) file.sweep = sweep_from_json(*c, "sweep");
  f.finish();
  if (file.runs.empty() && !file.sweep) Fields::fail("", "no runs and no sweep");
  return file;
}

ExperimentFile parse_experiment(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidSpec(std::string("malformed JSON: ") + e.what());
  }
  ExperimentFile file = experiment_from_json(j);
  expand_runs(file);
  return file;
}

ExperimentFile load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return parse_experiment(buf.str());
}

std::vector<RunConfig> expand_runs(const ExperimentFile& file) {
  std::vector<RunConfig> runs = file.runs;
  if (file.sweep) {
    const SweepSpec& s = *file.sweep;
    auto axis = [](const auto& values, const auto& fallback) {
      using T = std::decay_t<decltype(fallback)>;
      return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
    };
    const auto alphas = axis(s.alpha, s.base.alpha);
    const auto betas = axis(s.beta, s.base.aggregator.beta);
    const auto compressors = axis(s.compressor, s.base.compressor);
    const auto attacks = axis(s.attack, s.base.attack);
    const auto aggregators = axis(s.aggregator, s.base.aggregator);
    const std::size_t total =
        alphas.size() * betas.size() * compressors.size() * attacks.size() * aggregators.size();
    if (runs.size() + total > static_cast<std::size_t>(file.max_runs)) {
      throw InvalidSpec("sweep expands to " + std::to_string(runs.size() + total) +
                        " runs, above max_runs = " + std::to_string(file.max_runs));
    }
    for (const auto& agg : aggregators) {
      for (const auto& comp : compressors) {
        for (const auto& atk : attacks) {
          for (double alpha : alphas) {
            for (double beta : betas) {
              RunConfig cfg = s.base;
              std::string name = s.base.name;
              if (!s.aggregator.empty()) {
                cfg.aggregator = agg;
                if (agg.kind == AggregatorKind::kNormTrimOptionI) cfg.option = TrimOption::kI;
                if (agg.kind == AggregatorKind::kNormTrimOptionII) cfg.option = TrimOption::kII;
                name += "_" + std::string(to_string(agg.kind));
              }
              if (!s.compressor.empty()) {
                cfg.compressor = comp;
                name += "_" + std::string(to_string(comp.kind));
                if (comp.kind == CompressorKind::kTopK) name += std::to_string(comp.k);
                if (comp.kind == CompressorKind::kQsgd) name += std::to_string(comp.s);
              }
              if (!s.attack.empty()) {
                cfg.attack = atk;
                name += "_" + std::string(to_string(atk.kind));
              }
              if (!s.alpha.empty()) {
                cfg.alpha = alpha;
                name += "_a" + short_number(alpha);
              }
              if (!s.beta.empty()) {
                cfg.aggregator.beta = beta;
                name += "_b" + short_number(beta);
              }
              cfg.name = std::move(name);
              runs.push_back(std::move(cfg));
            }
          }
        }
      }
    }
  }
  if (runs.size() > static_cast<std::size_t>(file.max_runs)) {
    throw InvalidSpec("experiment has " + std::to_string(runs.size()) +
                      " runs, above max_runs = " + std::to_string(file.max_runs));
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunConfig& cfg = runs[i];
    const std::string where = "run '" + cfg.name + "'";
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
      Fields::fail(where, "name must be non-empty and contain no path separators");
    }
    if (cfg.name == "summary") Fields::fail(where, "name 'summary' is reserved");
    if (!names.insert(cfg.name).second) Fields::fail(where, "duplicate run name");
    with_path(where, [&] {
      cfg.validate();
      return 0;
    });
  }
  return runs;
}

}  // namespace byzgd
