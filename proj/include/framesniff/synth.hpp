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
#include <optional>

#include "framesniff/types.hpp"

namespace framesniff {

/// Largest whole-macroblock underfill of a fixed-size slice, in bytes.
inline constexpr int kMaxSliceUnderfill = 63;

/// Smallest inter-arrival gap produced by jitter injection.
inline constexpr double kMinJitteredGapUs = 1.0;

/**
 * Generates `n_gops` GoPs of a constant-bit-rate stream, frames in coding order.
 *
 * Frame k occupies the slot [k/fps, (k+1)/fps); its packets are spread evenly
 * over the slot, each one stamped when it is complete. Timestamps are whole
 * microseconds so traces survive a round trip through the CSV format.
 *
 * FixedSlicesPerFrame: exactly slices_per_frame packets per frame, sizes
 * carry the type. FixedBytesPerSlice: slice_bytes minus a random underfill of
 * up to 63 bytes per packet; the byte budget is carried across frames so the
 * stream stays on its bit rate.
 */
Trace synth_trace(const StreamProfile& profile, int n_gops, std::uint64_t seed);

/// Re-times every frame so that its first-to-last span equals `span_us`
/// (default: one frame period) with evenly spaced packets. The first packet
/// of each frame follows the previous frame's last packet by the frame's own
/// packet spacing.
Trace apply_smoothing(const Trace& trace, std::optional<double> span_us = std::nullopt);

/// Adds i.i.d. Normal(mean, sigma) to each inter-arrival gap, flooring gaps
/// at 1 us, and rebuilds timestamps from the first packet.
Trace apply_jitter(const Trace& trace, const JitterSpec& spec);

/// Inter-arrival gaps of a trace. The first packet has no predecessor and
/// reuses the second packet's gap.
std::vector<double> interarrival_gaps(const Trace& trace);

std::vector<double> packet_sizes(const Trace& trace);

}  // namespace framesniff
