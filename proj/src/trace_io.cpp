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

#include "framesniff/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace framesniff {
namespace {

enum Column { kSeq, kTs, kSize, kFrame, kTrue, kPred, kDropped, kColumnCount };
constexpr std::string_view kNames[kColumnCount] = {"seq",       "ts_us",     "size_bytes", "frame_idx",
                                                   "true_type", "pred_type", "dropped"};

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_int(std::string_view s, std::size_t line, std::string_view column) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError(line, "bad integer '" + std::string(s) + "' in column " + std::string(column));
    return v;
}

std::optional<FrameType> parse_type(std::string_view s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    if (s.size() == 1)
        if (auto t = frame_type_from_char(s[0])) return t;
    throw ParseError(line, "bad frame type '" + std::string(s) + "'");
}

}  // namespace

void write_trace(const Trace& trace, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const auto& p : trace.packets) {
        out << p.seq << ',' << std::llround(p.ts_us) << ',' << p.size_bytes << ',';
        if (p.frame_idx) out << *p.frame_idx;
        out << ',';
        if (p.true_type) out << to_char(*p.true_type);
        out << ',';
        if (p.pred_type) out << to_char(*p.pred_type);
        out << ',' << (p.dropped ? 1 : 0) << '\n';
    }
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    write_trace(trace, f);
    if (!f) throw IoError("write to " + path.string() + " failed");
}

Trace read_trace(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    int pos[kColumnCount];
    std::fill(std::begin(pos), std::end(pos), -1);
    const auto header = split(line);
    for (std::size_t i = 0; i < header.size(); ++i) {
        bool known = false;
        for (int c = 0; c < kColumnCount; ++c) {
            if (header[i] == kNames[c]) {
                if (pos[c] >= 0) throw ParseError(1, "duplicate column " + std::string(header[i]));
                pos[c] = static_cast<int>(i);
                known = true;
            }
        }
        if (!known) throw ParseError(1, "unknown column '" + std::string(header[i]) + "'");
    }
    for (int c : {kSeq, kTs, kSize})
        if (pos[c] < 0) throw ParseError(1, "missing required column " + std::string(kNames[c]));

    Trace trace;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(f.size()));
        auto field = [&](Column c) { return f[static_cast<std::size_t>(pos[c])]; };

        PacketRecord p;
        p.seq = parse_int<std::uint64_t>(field(kSeq), line_no, kNames[kSeq]);
        const auto ts = parse_int<std::int64_t>(field(kTs), line_no, kNames[kTs]);
        if (ts < 0) throw ParseError(line_no, "negative ts_us");
        p.ts_us = static_cast<double>(ts);
        p.size_bytes = parse_int<std::uint32_t>(field(kSize), line_no, kNames[kSize]);
        if (p.size_bytes < 1) throw ParseError(line_no, "size_bytes must be at least 1");
        if (pos[kFrame] >= 0 && !field(kFrame).empty())
            p.frame_idx = parse_int<std::uint64_t>(field(kFrame), line_no, kNames[kFrame]);
        if (pos[kTrue] >= 0) p.true_type = parse_type(field(kTrue), line_no);
        if (pos[kPred] >= 0) p.pred_type = parse_type(field(kPred), line_no);
        if (pos[kDropped] >= 0) {
            const auto d = field(kDropped);
            if (d == "1")
                p.dropped = true;
            else if (d != "0" && !d.empty())
                throw ParseError(line_no, "dropped must be 0 or 1");
        }

        if (!trace.packets.empty()) {
            const auto& prev = trace.packets.back();
            if (p.seq <= prev.seq) throw ParseError(line_no, "seq does not increase");
            if (p.ts_us < prev.ts_us) throw ParseError(line_no, "ts_us decreases");
        }
        trace.packets.push_back(p);
    }
    return trace;
}

Trace read_trace(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    return read_trace(f);
}

}  // namespace framesniff
