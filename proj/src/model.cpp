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

#include "framesniff/model.hpp"

#include <algorithm>
#include <sstream>

namespace framesniff {

std::optional<FrameType> frame_type_from_char(char c) {
    switch (c) {
        case 'I': return FrameType::I;
        case 'P': return FrameType::P;
        case 'B': return FrameType::B;
        case 'b': return FrameType::b;
        default: return std::nullopt;
    }
}

std::vector<FrameType> parse_pattern(std::string_view pattern) {
    std::vector<FrameType> out;
    for (char c : pattern) {
        if (c == ' ' || c == '\t') continue;
        auto t = frame_type_from_char(c);
        if (!t) throw DomainError(std::string("invalid frame type '") + c + "' in pattern");
        out.push_back(*t);
    }
    return out;
}

std::string format_pattern(const std::vector<FrameType>& types) {
    std::string s;
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (i) s += ' ';
        s += to_char(types[i]);
    }
    return s;
}

std::string_view to_string(SlicingMode m) {
    return m == SlicingMode::FixedSlicesPerFrame ? "slices" : "bytes";
}

bool StreamProfile::has_type(FrameType t) const {
    return std::find(gop_display.begin(), gop_display.end(), t) != gop_display.end();
}

std::vector<FrameType> coding_order(const std::vector<FrameType>& display) {
    std::vector<FrameType> out;
    out.reserve(display.size());
    std::vector<FrameType> pending;
    auto flush = [&] {
        // Reference B frames go first; stable keeps their display order.
        std::stable_sort(pending.begin(), pending.end(),
                         [](FrameType a, FrameType b) { return rank(a) > rank(b); });
        out.insert(out.end(), pending.begin(), pending.end());
        pending.clear();
    };
    for (FrameType t : display) {
        if (is_anchor(t)) {
            out.push_back(t);
            flush();
        } else {
            pending.push_back(t);
        }
    }
    flush();
    return out;
}

void validate_profile(const StreamProfile& p) {
    if (p.bitrate_bps <= 0) throw DomainError("bitrate_bps must be positive");
    if (!(p.fps > 0)) throw DomainError("fps must be positive");
    if (p.gop_display.empty() || p.gop_display.front() != FrameType::I)
        throw DomainError("GoP must start with an I-frame");
    if (std::count(p.gop_display.begin(), p.gop_display.end(), FrameType::I) != 1)
        throw DomainError("GoP must contain exactly one I-frame");
    auto a = p.gop_display;
    auto b = p.gop_coding;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw DomainError("gop_coding is not a permutation of gop_display");
    const auto& w = p.complexity_weights;
    auto wt = [&](FrameType t) { return w[static_cast<std::size_t>(rank(t))]; };
    if (!(wt(FrameType::I) > wt(FrameType::P) && wt(FrameType::P) > wt(FrameType::B) &&
          wt(FrameType::B) >= wt(FrameType::b) && wt(FrameType::b) > 0))
        throw DomainError("complexity weights must satisfy I > P > B >= b > 0");
    if (p.slices_per_frame < 1) throw DomainError("slices_per_frame must be positive");
    if (p.slice_bytes < 64) throw DomainError("slice_bytes must be at least 64");
    if (p.size_noise_cv < 0) throw DomainError("size_noise_cv must be non-negative");
}

std::vector<StreamProfile> builtin_profiles() {
    struct Row {
        int id;
        int m;
        const char* display;
    };
    static constexpr Row kRows[] = {
        {1, 3, "I B B P B B P B B P B B"},
        {2, 3, "I B B P B B P B B P B B P B B"},
        {3, 5, "I B B B B P B B B B P B B B B"},
        {4, 3, "I B B P B B P B B P B B P B B P B B"},
        {5, 6, "I b B b B b P b B b B b P b B b B b"},
    };
    std::vector<StreamProfile> out;
    for (const auto& row : kRows) {
        StreamProfile p;
        p.id = row.id;
        p.anchor_distance = row.m;
        p.gop_display = parse_pattern(row.display);
        p.gop_coding = coding_order(p.gop_display);
        p.complexity_weights = {kDefaultNonRefWeight, 1.0, 3.0, 5.0};
        out.push_back(std::move(p));
    }
    return out;
}

StreamProfile builtin_profile(int id) {
    for (auto& p : builtin_profiles())
        if (p.id == id) return p;
    throw ConfigError("unknown profile id " + std::to_string(id) + " (expected 1..5)");
}

double expected_frame_bytes(const StreamProfile& p, FrameType t) {
    if (!p.has_type(t))
        throw DomainError(std::string("frame type ") + to_char(t) + " does not occur in the GoP");
    double total_weight = 0;
    for (FrameType f : p.gop_display) total_weight += p.weight(f);
    const double bytes_per_frame = static_cast<double>(p.bitrate_bps) / 8.0 / p.fps;
    return bytes_per_frame * static_cast<double>(p.gop_size()) * p.weight(t) / total_weight;
}

double expected_interarrival_us(const StreamProfile& p, FrameType t, double unit_bytes) {
    if (p.slicing_mode != SlicingMode::FixedBytesPerSlice)
        throw DomainError("inter-arrival model requires fixed-bytes-per-slice streams");
    if (!(unit_bytes > 0)) throw DomainError("unit_bytes must be positive");
    return p.frame_period_us() / (expected_frame_bytes(p, t) / unit_bytes);
}

double expected_interarrival_us(const StreamProfile& p, FrameType t) {
    return expected_interarrival_us(p, t, static_cast<double>(p.slice_bytes));
}

}  // namespace framesniff
