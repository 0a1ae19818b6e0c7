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

#ifndef BYZGD_TRACE_IO_HPP_
#define BYZGD_TRACE_IO_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "byzgd/config.hpp"
#include "byzgd/engine.hpp"

namespace byzgd {

inline constexpr std::string_view kTraceCsvHeader =
    "t,dist_to_opt,loss,grad_norm,trimmed,byz_caught,cum_bits,delta_norm";

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite.
std::string format_double(double x);
double parse_double(std::string_view text);

/// CSV: one header line then one line per record; trimmed indices are joined
/// with ';'. JSON: an array of objects with the same field names, non-finite
/// values as null.
std::string format_trace(const std::vector<TraceRecord>& records, TraceFormat format);
std::vector<TraceRecord> parse_trace_csv(std::string_view text);
std::vector<TraceRecord> parse_trace_json(std::string_view text);

/// Throws IoError when the file cannot be written.
void emit_trace(const std::vector<TraceRecord>& records, TraceFormat format,
                const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace byzgd

#endif  // BYZGD_TRACE_IO_HPP_
