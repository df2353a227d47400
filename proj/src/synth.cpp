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

#include "framesniff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "framesniff/model.hpp"

namespace framesniff {
namespace {

// Multiplicative noise factor 1 + cv*Z, kept strictly positive.
double noise_factor(std::mt19937_64& rng, double cv) {
    if (cv <= 0) return 1.0;
    std::normal_distribution<double> z(0.0, 1.0);
    return std::max(0.05, 1.0 + cv * z(rng));
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

Trace synth_trace(const StreamProfile& profile, int n_gops, std::uint64_t seed) {
    if (n_gops < 1) throw DomainError("n_gops must be at least 1");
    validate_profile(profile);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> underfill(0, kMaxSliceUnderfill);

    Trace trace;
    trace.profile = profile;
    trace.meta["seed"] = std::to_string(seed);
    trace.meta["gops"] = std::to_string(n_gops);
    trace.meta["mode"] = std::string(to_string(profile.slicing_mode));
    trace.meta["noise_cv"] = fmt_double(profile.size_noise_cv);

    const double period = profile.frame_period_us();
    std::vector<double> type_bytes(4);
    for (FrameType t : kAllTypes)
        if (profile.has_type(t))
            type_bytes[static_cast<std::size_t>(rank(t))] = expected_frame_bytes(profile, t);

    std::vector<std::uint32_t> sizes;
    double carry = 0.0;  // mode B: bytes still owed to the rate budget
    std::uint64_t frame = 0;
    for (int g = 0; g < n_gops; ++g) {
        for (FrameType t : profile.gop_coding) {
            const double target = type_bytes[static_cast<std::size_t>(rank(t))] *
                                  noise_factor(rng, profile.size_noise_cv);
            sizes.clear();
            if (profile.slicing_mode == SlicingMode::FixedSlicesPerFrame) {
                const double slice_mean = target / profile.slices_per_frame;
                for (int s = 0; s < profile.slices_per_frame; ++s) {
                    double v = slice_mean * noise_factor(rng, profile.size_noise_cv);
                    sizes.push_back(static_cast<std::uint32_t>(std::max(1.0, std::round(v))));
                }
            } else {
                const double budget = target + carry;
                double emitted = 0;
                do {
                    auto sz = static_cast<std::uint32_t>(profile.slice_bytes - underfill(rng));
                    sizes.push_back(sz);
                    emitted += sz;
                } while (emitted < budget);
                carry = budget - emitted;
            }

            const double slot_start = static_cast<double>(frame) * period;
            const double spacing = period / static_cast<double>(sizes.size());
            for (std::size_t j = 0; j < sizes.size(); ++j) {
                PacketRecord p;
                p.seq = trace.packets.size();
                p.ts_us = std::round(slot_start + static_cast<double>(j + 1) * spacing);
                p.size_bytes = sizes[j];
                p.true_type = t;
                p.frame_idx = frame;
                trace.packets.push_back(p);
            }
            ++frame;
        }
    }
    return trace;
}

Trace apply_smoothing(const Trace& trace, std::optional<double> span_us) {
    const double span = span_us.value_or(trace.profile.frame_period_us());
    if (!(span > 0)) throw DomainError("smoothing span must be positive");
    for (const auto& p : trace.packets)
        if (!p.frame_idx) throw DomainError("smoothing requires frame_idx on every packet");

    Trace out = trace;
    out.meta["smoothing_span_us"] = fmt_double(span);
    auto& pk = out.packets;
    if (pk.empty()) return out;

    double t = pk.front().ts_us;
    std::size_t i = 0;
    bool first_frame = true;
    while (i < pk.size()) {
        std::size_t j = i;
        while (j < pk.size() && pk[j].frame_idx == pk[i].frame_idx) ++j;
        const std::size_t n = j - i;
        const double gap = n > 1 ? span / static_cast<double>(n - 1) : span;
        for (std::size_t k = i; k < j; ++k) {
            if (k != i || !first_frame) t += gap;
            pk[k].ts_us = std::round(t);
        }
        first_frame = false;
        i = j;
    }
    return out;
}

Trace apply_jitter(const Trace& trace, const JitterSpec& spec) {
    if (spec.sigma_us < 0) throw DomainError("jitter sigma must be non-negative");
    Trace out = trace;
    out.meta["jitter_mean_us"] = fmt_double(spec.mean_us);
    out.meta["jitter_sigma_us"] = fmt_double(spec.sigma_us);
    out.meta["jitter_seed"] = std::to_string(spec.seed);
    if (spec.mean_us == 0 && spec.sigma_us == 0) return out;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    auto& pk = out.packets;
    for (std::size_t i = 1; i < pk.size(); ++i) {
        const double gap = trace.packets[i].ts_us - trace.packets[i - 1].ts_us;
        const double jittered = gap + spec.mean_us + spec.sigma_us * z(rng);
        pk[i].ts_us = pk[i - 1].ts_us + std::max(kMinJitteredGapUs, std::round(jittered));
    }
    return out;
}

std::vector<double> interarrival_gaps(const Trace& trace) {
    const auto& pk = trace.packets;
    std::vector<double> gaps(pk.size());
    for (std::size_t i = 1; i < pk.size(); ++i) gaps[i] = pk[i].ts_us - pk[i - 1].ts_us;
    if (pk.size() > 1)
        gaps[0] = gaps[1];
    else if (pk.size() == 1)
        gaps[0] = trace.profile.frame_period_us();
    return gaps;
}

std::vector<double> packet_sizes(const Trace& trace) {
    std::vector<double> s;
    s.reserve(trace.packets.size());
    for (const auto& p : trace.packets) s.push_back(p.size_bytes);
    return s;
}

}  // namespace framesniff
