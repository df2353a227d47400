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
#include <span>
#include <vector>

#include "framesniff/detect.hpp"
#include "framesniff/types.hpp"

namespace framesniff {

struct KMeansResult {
    std::vector<double> centroids;  // ascending
    std::vector<int> assignments;   // index into centroids, per input feature
    double sse = 0.0;
    int iterations = 0;
};

/**
 * One-dimensional Lloyd k-means.
 *
 * Features are sorted first, so the result does not depend on input order.
 * The first start places seeds at the k quantile positions of the sorted
 * list; `restarts` further k-means++ starts are drawn from `seed`, and the
 * lowest-SSE solution is kept. An empty cluster is re-seeded from the point
 * farthest from its centroid. Converges when every centroid moves by less
 * than `tol` relative to its magnitude.
 */
KMeansResult kmeans(std::span<const double> features, int k, std::uint64_t seed, double tol = 1e-6,
                    int max_iter = 100, int restarts = 8);

struct Centroid {
    double value = 0.0;
    FrameType type = FrameType::I;
};

/// Sorts descending and assigns I, P, B (and b for a fourth cluster).
/// Equal values throw DomainError naming both input indices.
std::vector<Centroid> map_clusters(std::span<const double> centroids);

struct ClassifierModel {
    SlicingMode mode = SlicingMode::FixedBytesPerSlice;
    std::optional<int> slices_per_frame;  // FixedSlicesPerFrame only
    std::size_t phase = 0;                // first frame start, FixedSlicesPerFrame only
    std::optional<int> gop_size;
    std::vector<Centroid> centroids;  // strictly descending
    std::size_t calibration_begin = 0;
    std::size_t calibration_end = 0;
    double boundary_threshold = 0.0;  // FixedBytesPerSlice only
    std::optional<double> frame_period_us;  // FixedBytesPerSlice only
    int half_window = 8;
    bool hierarchical = false;
    std::optional<int> minigop_length;  // non-anchor runs longer than this are refined in chunks

    bool fitted() const { return !centroids.empty(); }
    bool has_type(FrameType t) const;
};

/// Nearest centroid by absolute distance; ties go to the more important type.
FrameType online_label(double feature, const ClassifierModel& model);

/// Labels every frame of a boundary set, the trailing partial frame included.
std::vector<FrameType> label_frames(const BoundarySet& frames, const ClassifierModel& model);

/// Expands per-frame labels to per-packet labels.
std::vector<FrameType> broadcast_labels(const BoundarySet& frames, std::span<const FrameType> frame_labels,
                                        std::size_t n_packets);

/**
 * Enforces coding-order importance inside each run of non-anchor frames:
 * after the first b, every later frame of the run is b. With
 * `split_runs_without_b`, runs that contain no b get their trailing
 * ceil(len/2) frames relabeled b. With `max_run`, a longer run is treated
 * as consecutive chunks of that length, as happens when a closed GoP sends
 * its trailing miniGoP right after the previous one.
 */
std::vector<FrameType> hierarchical_refine(std::span<const FrameType> frame_types, bool split_runs_without_b = false,
                                           std::optional<std::size_t> max_run = std::nullopt);

/// Most common length of the non-anchor runs enclosed by anchors (ties go to
/// the shorter run); nullopt when no run is enclosed.
std::optional<int> typical_run_length(std::span<const FrameType> frame_types);

struct FitConfig {
    std::optional<SlicingMode> mode;  // sniffed from size dispersion when unset
    int kmeans_k = 4;
    bool auto_merge = true;  // k=4 -> 3 when the two smallest centroids are within 10%
    bool hierarchical = false;
    SliceDetectConfig slices;
    int l_max = 31;
    int half_window = 8;
    std::optional<double> threshold;  // fixed change-score threshold; adaptive when unset
    double threshold_scale = 9.0;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    int max_iter = 100;
    std::optional<std::size_t> calibration_packets;  // whole trace when unset
};

/// Packet-size coefficient of variation below which a stream is treated as
/// fixed bytes per slice.
inline constexpr double kFixedSizeCv = 0.05;

SlicingMode sniff_mode(std::span<const double> sizes);

ClassifierModel fit(const Trace& trace, const FitConfig& config = {});

/// Labels every packet of `trace` with `model` and returns the labels.
std::vector<FrameType> classify_packets(const Trace& trace, const ClassifierModel& model);

/// Copy of `trace` with pred_type set on every packet.
Trace label_trace(const Trace& trace, const ClassifierModel& model);

}  // namespace framesniff
