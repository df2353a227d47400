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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "framesniff/types.hpp"

namespace framesniff {

enum class DropPolicy { Smart, GroundTruth, Random };

std::string_view to_string(DropPolicy p);
DropPolicy drop_policy_from_string(std::string_view s);

struct DropPlan {
    DropPolicy policy = DropPolicy::Smart;
    double target_fraction = 0.0;
    int window_ms = 1000;
    std::vector<bool> decisions;  // true = drop, aligned with the trace
    std::int64_t dropped_bytes = 0;
    std::int64_t total_bytes = 0;
};

inline constexpr int kDefaultDropWindowMs = 1000;

/// Accounting window a packet falls into: floor(ts / window).
std::int64_t window_index(const PacketRecord& p, int window_ms);

/**
 * Byte-budget discard by label importance.
 *
 * Within every accounting window, packets are dropped b first, then B, P and
 * I, oldest first inside a class, until the dropped bytes reach
 * fraction * window bytes. The budget is overshot by at most one packet.
 * `policy` only tags the plan (Smart for predicted labels, GroundTruth for
 * true labels).
 */
DropPlan plan_priority_drop(const Trace& trace, std::span<const FrameType> labels, double fraction,
                            int window_ms = kDefaultDropWindowMs, DropPolicy policy = DropPolicy::Smart);

/// Independent Bernoulli(fraction) drop per packet.
DropPlan plan_random_drop(const Trace& trace, double fraction, std::uint64_t seed,
                          int window_ms = kDefaultDropWindowMs);

/// Copy of `trace` with `dropped` set from the plan. Nothing is removed.
Trace apply_plan(const Trace& trace, const DropPlan& plan);

/// Per-packet true or predicted labels; throws DomainError if any is missing.
std::vector<FrameType> true_labels(const Trace& trace);
std::vector<FrameType> predicted_labels(const Trace& trace);

}  // namespace framesniff
