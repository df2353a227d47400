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

#include <vector>

#include "framesniff/types.hpp"

namespace framesniff {

/// Default weight of a non-reference b-frame relative to B = 1.
inline constexpr double kDefaultNonRefWeight = 0.8;

/// Byte unit used for the "packets per frame" accounting of the traffic model
/// (1 KB = 1000 bytes). The generator itself packs 1024-byte slices.
inline constexpr double kAccountingUnitBytes = 1000.0;

/**
 * Transmission order for one closed GoP given in display order.
 *
 * Every anchor (I/P) is sent before the non-anchor frames it closes; the
 * pending non-anchors follow it, reference B before non-reference b. The
 * non-anchors after the last anchor are flushed at the end of the GoP.
 */
std::vector<FrameType> coding_order(const std::vector<FrameType>& display);

/// Throws DomainError when the profile breaks a StreamProfile invariant.
void validate_profile(const StreamProfile& profile);

/// The five GoP structures (ids 1..5) at 4 Mbit/s and 30 fps.
std::vector<StreamProfile> builtin_profiles();

/// Throws ConfigError for an unknown id.
StreamProfile builtin_profile(int id);

/// Average encoded bytes of a frame of type `t` under the complexity-weight model.
double expected_frame_bytes(const StreamProfile& profile, FrameType t);

/// Mean packet inter-arrival inside a frame of type `t` when packets carry
/// `unit_bytes` each. Only meaningful for FixedBytesPerSlice streams.
double expected_interarrival_us(const StreamProfile& profile, FrameType t, double unit_bytes);

/// Same, using the profile's own slice size as the unit.
double expected_interarrival_us(const StreamProfile& profile, FrameType t);

}  // namespace framesniff
