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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "framesniff/types.hpp"

namespace framesniff {

/// Added to every variance denominator so that constant windows stay finite.
inline constexpr double kVarianceEpsilon = 1e-9;

/// Packet size over inter-arrival gap, elementwise (bytes per microsecond).
std::vector<double> bit_generation_ratio(std::span<const double> sizes, std::span<const double> gaps);

// --- Frame length for fixed coding units per slice ---------------------------

/// Separation of two adjacent windows of `n` packets starting at `start`:
/// (mu1 - mu2)^2 / (var1 + var2 + eps), population variances.
double window_pair_score(std::span<const double> sizes, std::size_t start, std::size_t n);

struct SliceDetectConfig {
    int n_min = 2;
    int n_max = 256;
    int required_agreements = 4;
    // Window pairs pooled into one round's score. 1 reduces to a single pair.
    int pairs_per_round = 8;
};

struct SliceStructure {
    int slices_per_frame = 0;
    std::size_t phase = 0;  // index of the first packet of a frame, in [0, N)
    int rounds = 0;
};

/**
 * Finds the number of slices per frame.
 *
 * Each round scores every candidate length n at every phase inside one
 * window, pooling `pairs_per_round` consecutive window pairs:
 * sum (mu_j - mu_{j+1})^2 / (sum (var_j + var_{j+1}) + eps). Pooling keeps the
 * true length ahead when two neighbouring frames share a type. Exact ties go
 * to the larger n (a divisor of N also yields pure windows). Rounds advance
 * by one winning window; the first length that wins `required_agreements`
 * consecutive rounds is returned.
 *
 * Throws DomainError if the input is shorter than 2*n_max*(agreements+1),
 * DetectionError if no length reaches the agreement count.
 */
SliceStructure detect_slice_structure(std::span<const double> sizes, const SliceDetectConfig& config = {});

int detect_slices_per_frame(std::span<const double> sizes, int n_min = 2, int n_max = 256);

/// Sums of consecutive non-overlapping groups of `n` sizes; a trailing
/// remainder shorter than `n` is discarded.
std::vector<double> frame_sizes(std::span<const double> sizes, int n);

// --- Frame boundaries for fixed bytes per slice ------------------------------

struct BoundarySet {
    std::vector<std::size_t> boundaries;  // last packet index of each frame
    std::vector<double> frame_features;   // mean ratio over each frame
    std::optional<double> trailing_feature;  // packets after the last boundary
    double threshold = 0.0;
    std::optional<double> frame_period_us;  // set by align_to_frame_slots
};

/**
 * Change score of every packet. With m the mean size,
 * lambda_i = m - size_i (1 when equal) and
 * C_i = lambda_i^2 (mean R(i, i+L] - mean R[i-L, i))^2 / (var + var + eps).
 * Indices closer than L to either end have no full window and score 0.
 */
std::vector<double> change_scores(std::span<const double> sizes, std::span<const double> ratios, int half_window);

/**
 * Frame ends from change scores. Indices with C_i > threshold are
 * candidates; each run of adjacent candidates is one change, placed at the
 * split inside [first - 1, last] that best separates the L packets on either
 * side (both windows inclusive of the split). Ties take the earlier index.
 */
BoundarySet detect_boundaries(std::span<const double> sizes, std::span<const double> ratios, int half_window,
                              double threshold);

/**
 * Typical frame period from segment durations: the duration shared (within
 * 10%) by the most segments, since single frames recur while fragments
 * scatter; ties take the longer one. It is then refined over the segments
 * lasting close to a whole number of periods.
 */
double estimate_frame_period(std::span<const double> durations);

/**
 * Aligns change-point segments to frame slots. Neighbouring segments whose
 * mean ratios differ by 10% or less are merged, since the change score
 * cannot separate frames of one level. Every frame occupies one frame period
 * on the wire, so a segment lasting k periods is then split into k frames at
 * the packets closest to each period mark, and a segment shorter than half a
 * period is folded into the neighbour with the closer mean ratio.
 * Packet durations are recovered as size / ratio. The trailing partial frame
 * is left as is. Uses `period_us` when given, else estimate_frame_period().
 */
BoundarySet align_to_frame_slots(const BoundarySet& segments, std::span<const double> sizes,
                                 std::span<const double> ratios, std::optional<double> period_us = std::nullopt);

/// Adaptive threshold: `scale` times the median change score.
double adaptive_threshold(std::span<const double> scores, int half_window, double scale = 9.0);

// --- GoP size -----------------------------------------------------------------

/// G_l = sum_{i=1}^{K-l} |S_i - S_{i+l-1}|.
double gop_window_cost(std::span<const double> frame_sizes, int l);

/**
 * GoP length from frame sizes: the window length l in [2, l_max] minimizing
 * G_l, minus one. Costs are compared per term (G_l / (K - l)); the smallest
 * l within 20% of the minimum wins so that multiples of the period lose.
 * Throws DomainError when fewer than 2*l_max frames are given.
 */
int detect_gop_size(std::span<const double> frame_sizes, int l_max = 31);

}  // namespace framesniff
