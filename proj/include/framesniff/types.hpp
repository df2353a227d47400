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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace framesniff {

// Errors. Each maps to one CLI exit code (see tools/framesniff_cli.cpp).

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Precondition or argument outside the operation's domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A structure detector could not reach a verdict on the given data.
class DetectionError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Malformed trace file; carries the 1-based line number.
class ParseError : public IoError {
  public:
    ParseError(std::size_t line, const std::string& what)
        : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// Operation invoked on an object in the wrong state (e.g. unfitted model).
class StateError : public Error {
  public:
    using Error::Error;
};

/// Frame type. The underlying value is the importance rank: I=3 > P=2 > B=1 > b=0.
/// `B` is a reference B-frame, `b` a non-reference one.
enum class FrameType : std::uint8_t { b = 0, B = 1, P = 2, I = 3 };

inline constexpr std::array<FrameType, 4> kAllTypes = {FrameType::I, FrameType::P, FrameType::B,
                                                       FrameType::b};

constexpr int rank(FrameType t) { return static_cast<int>(t); }

constexpr bool is_anchor(FrameType t) { return t == FrameType::I || t == FrameType::P; }

/// Row/column index used by reports: I=0, P=1, B=2, b=3.
constexpr std::size_t report_index(FrameType t) { return static_cast<std::size_t>(3 - rank(t)); }

constexpr char to_char(FrameType t) {
    switch (t) {
        case FrameType::I: return 'I';
        case FrameType::P: return 'P';
        case FrameType::B: return 'B';
        case FrameType::b: return 'b';
    }
    return '?';
}

std::optional<FrameType> frame_type_from_char(char c);

/// Parses a whitespace-separated pattern such as "I B B P B B".
std::vector<FrameType> parse_pattern(std::string_view pattern);
std::string format_pattern(const std::vector<FrameType>& types);

struct PacketRecord {
    std::uint64_t seq = 0;
    double ts_us = 0.0;
    std::uint32_t size_bytes = 1;
    std::optional<FrameType> true_type;
    std::optional<FrameType> pred_type;
    std::optional<std::uint64_t> frame_idx;
    bool dropped = false;

    bool operator==(const PacketRecord&) const = default;
};

enum class SlicingMode {
    FixedSlicesPerFrame,  // "mode A": packet size carries the frame type
    FixedBytesPerSlice,   // "mode B": inter-arrival time carries the frame type
};

std::string_view to_string(SlicingMode m);

/// Per-type weights indexed by rank (b, B, P, I).
using TypeWeights = std::array<double, 4>;

struct StreamProfile {
    int id = 0;
    std::int64_t bitrate_bps = 4'000'000;
    double fps = 30.0;
    std::vector<FrameType> gop_display;
    std::vector<FrameType> gop_coding;
    int anchor_distance = 1;  // M
    TypeWeights complexity_weights{0.8, 1.0, 3.0, 5.0};
    SlicingMode slicing_mode = SlicingMode::FixedBytesPerSlice;
    int slices_per_frame = 100;
    int slice_bytes = 1024;
    double size_noise_cv = 0.10;
    bool smoothing = false;

    std::size_t gop_size() const { return gop_display.size(); }
    double weight(FrameType t) const { return complexity_weights[static_cast<std::size_t>(rank(t))]; }
    double frame_period_us() const { return 1e6 / fps; }
    bool has_type(FrameType t) const;
};

struct JitterSpec {
    double mean_us = 0.0;
    double sigma_us = 0.0;
    std::uint64_t seed = 0;
};

struct Trace {
    std::vector<PacketRecord> packets;
    StreamProfile profile;
    std::map<std::string, std::string> meta;
};

}  // namespace framesniff
