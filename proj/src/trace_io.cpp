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

#include "byzgd/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace byzgd {
namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename Int>
Int parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DecodeError("bad integer '" + std::string(text) + "'");
  }
  return value;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DecodeError("bad number '" + std::string(text) + "'");
  }
  return value;
}

std::string format_trace(const std::vector<TraceRecord>& records, TraceFormat format) {
  if (format == TraceFormat::kJson) {
    json out = json::array();
    for (const auto& r : records) {
      out.push_back({{"t", r.t},
                     {"dist_to_opt", number_or_null(r.dist_to_opt)},
                     {"loss", number_or_null(r.loss)},
                     {"grad_norm", number_or_null(r.grad_norm)},
                     {"trimmed", r.trimmed},
                     {"byz_caught", r.byz_caught},
                     {"cum_bits", r.cum_bits},
                     {"delta_norm", number_or_null(r.delta_norm)}});
    }
    return out.dump(1) + "\n";
  }
  std::string out(kTraceCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.t);
    for (double x : {r.dist_to_opt, r.loss, r.grad_norm}) {
      out += ',';
      out += format_double(x);
    }
    out += ',';
    for (std::size_t i = 0; i < r.trimmed.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(r.trimmed[i]);
    }
    out += ',' + std::to_string(r.byz_caught) + ',' + std::to_string(r.cum_bits) + ',' +
           format_double(r.delta_norm) + '\n';
  }
  return out;
}

std::vector<TraceRecord> parse_trace_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kTraceCsvHeader) throw DecodeError("missing trace header");
  std::vector<TraceRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], ',');
    if (cols.size() != 8) throw DecodeError("line " + std::to_string(i + 1) + ": expected 8 columns");
    TraceRecord r;
    r.t = parse_int<int>(cols[0]);
    r.dist_to_opt = parse_double(cols[1]);
    r.loss = parse_double(cols[2]);
    r.grad_norm = parse_double(cols[3]);
    if (!cols[4].empty()) {
      for (auto idx : split(cols[4], ';')) r.trimmed.push_back(parse_int<int>(idx));
    }
    r.byz_caught = parse_int<int>(cols[5]);
    r.cum_bits = parse_int<std::int64_t>(cols[6]);
    r.delta_norm = parse_double(cols[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> parse_trace_json(std::string_view text) {
  std::vector<TraceRecord> out;
  try {
    const json j = json::parse(text);
    for (const auto& e : j) {
      TraceRecord r;
      r.t = e.at("t").get<int>();
      r.dist_to_opt = number_from(e.at("dist_to_opt"));
      r.loss = number_from(e.at("loss"));
      r.grad_norm = number_from(e.at("grad_norm"));
      r.trimmed = e.at("trimmed").get<std::vector<int>>();
      r.byz_caught = e.at("byz_caught").get<int>();
      r.cum_bits = e.at("cum_bits").get<std::int64_t>();
      r.delta_norm = number_from(e.at("delta_norm"));
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DecodeError(e.what());
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << contents;
  out.close();
  if (!out) throw IoError("failed writing " + path);
}

void emit_trace(const std::vector<TraceRecord>& records, TraceFormat format,
                const std::string& path) {
  write_text_file(path, format_trace(records, format));
}

}  // namespace byzgd
