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

#include "framesniff/discard.hpp"

#include <cmath>
#include <random>

namespace framesniff {
namespace {

void check_fraction(double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("drop fraction must lie in [0, 1]");
}

std::int64_t total_bytes(const Trace& t) {
    std::int64_t s = 0;
    for (const auto& p : t.packets) s += p.size_bytes;
    return s;
}

}  // namespace

std::string_view to_string(DropPolicy p) {
    switch (p) {
        case DropPolicy::Smart: return "smart";
        case DropPolicy::GroundTruth: return "truth";
        case DropPolicy::Random: return "random";
    }
    return "?";
}

DropPolicy drop_policy_from_string(std::string_view s) {
    if (s == "smart") return DropPolicy::Smart;
    if (s == "truth") return DropPolicy::GroundTruth;
    if (s == "random") return DropPolicy::Random;
    throw ConfigError("unknown drop policy '" + std::string(s) + "'");
}

std::int64_t window_index(const PacketRecord& p, int window_ms) {
    return static_cast<std::int64_t>(std::floor(p.ts_us / (static_cast<double>(window_ms) * 1000.0)));
}

DropPlan plan_priority_drop(const Trace& trace, std::span<const FrameType> labels, double fraction, int window_ms,
                            DropPolicy policy) {
    check_fraction(fraction);
    if (window_ms < 1) throw DomainError("window_ms must be positive");
    const auto& pk = trace.packets;
    if (labels.size() != pk.size()) throw DomainError("labels do not cover every packet");

    DropPlan plan;
    plan.policy = policy;
    plan.target_fraction = fraction;
    plan.window_ms = window_ms;
    plan.decisions.assign(pk.size(), false);
    plan.total_bytes = total_bytes(trace);

    std::size_t begin = 0;
    while (begin < pk.size()) {
        const auto w = window_index(pk[begin], window_ms);
        std::size_t end = begin;
        double window_bytes = 0;
        while (end < pk.size() && window_index(pk[end], window_ms) == w) window_bytes += pk[end++].size_bytes;

        const double budget = fraction * window_bytes;
        double dropped = 0;
        for (FrameType cls : {FrameType::b, FrameType::B, FrameType::P, FrameType::I}) {
            for (std::size_t i = begin; i < end && dropped < budget; ++i) {
                if (labels[i] != cls) continue;
                plan.decisions[i] = true;
                dropped += pk[i].size_bytes;
            }
        }
        plan.dropped_bytes += static_cast<std::int64_t>(dropped);
        begin = end;
    }
    return plan;
}

DropPlan plan_random_drop(const Trace& trace, double fraction, std::uint64_t seed, int window_ms) {
    check_fraction(fraction);
    DropPlan plan;
    plan.policy = DropPolicy::Random;
    plan.target_fraction = fraction;
    plan.window_ms = window_ms;
    plan.decisions.assign(trace.packets.size(), false);
    plan.total_bytes = total_bytes(trace);

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(fraction);
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        if (coin(rng)) {
            plan.decisions[i] = true;
            plan.dropped_bytes += trace.packets[i].size_bytes;
        }
    }
    return plan;
}

Trace apply_plan(const Trace& trace, const DropPlan& plan) {
    if (plan.decisions.size() != trace.packets.size())
        throw DomainError("drop plan has " + std::to_string(plan.decisions.size()) + " decisions for " +
                          std::to_string(trace.packets.size()) + " packets");
    Trace out = trace;
    for (std::size_t i = 0; i < out.packets.size(); ++i) out.packets[i].dropped = plan.decisions[i];
    return out;
}

std::vector<FrameType> true_labels(const Trace& trace) {
    std::vector<FrameType> out;
    out.reserve(trace.packets.size());
    for (const auto& p : trace.packets) {
        if (!p.true_type) throw DomainError("packet " + std::to_string(p.seq) + " has no true type");
        out.push_back(*p.true_type);
    }
    return out;
}

std::vector<FrameType> predicted_labels(const Trace& trace) {
    std::vector<FrameType> out;
    out.reserve(trace.packets.size());
    for (const auto& p : trace.packets) {
        if (!p.pred_type) throw DomainError("packet " + std::to_string(p.seq) + " has no predicted type");
        out.push_back(*p.pred_type);
    }
    return out;
}

}  // namespace framesniff
