// Copyright 2026 The framesniff Authors
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

#pragma once

#include <filesystem>
#include <iosfwd>

#include "framesniff/types.hpp"

namespace framesniff {

// Trace CSV:
//
//   seq,ts_us,size_bytes,frame_idx,true_type,pred_type,dropped
//   0,724,1003,0,I,,0
//
// ts_us is written as whole microseconds. Type columns hold I/P/B/b or are
// empty; dropped is 0/1. On read, seq/ts_us/size_bytes are required and the
// other columns may be absent from the header. LF line endings.

inline constexpr const char* kTraceHeader = "seq,ts_us,size_bytes,frame_idx,true_type,pred_type,dropped";

void write_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::filesystem::path& path);

/// Throws ParseError (with line number) on malformed rows, non-increasing seq
/// or decreasing ts_us; IoError if the file cannot be opened.
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);

}  // namespace framesniff
