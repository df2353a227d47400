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

#include "framesniff/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "framesniff/synth.hpp"

namespace framesniff {
namespace {

struct Lloyd {
    std::vector<double> centroids;
    std::vector<int> assign;
    double sse = 0;
    int iterations = 0;
};

int nearest(const std::vector<double>& c, double x) {
    int best = 0;
    double bd = std::abs(x - c[0]);
    for (std::size_t j = 1; j < c.size(); ++j) {
        const double d = std::abs(x - c[j]);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

Lloyd run_lloyd(const std::vector<double>& xs, std::vector<double> c, double tol, int max_iter) {
    const std::size_t k = c.size();
    Lloyd r;
    r.assign.assign(xs.size(), 0);
    for (int it = 0; it < max_iter; ++it) {
        r.iterations = it + 1;
        for (std::size_t i = 0; i < xs.size(); ++i) r.assign[i] = nearest(c, xs[i]);

        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sum[static_cast<std::size_t>(r.assign[i])] += xs[i];
            ++cnt[static_cast<std::size_t>(r.assign[i])];
        }
        bool converged = true;
        for (std::size_t j = 0; j < k; ++j) {
            double next;
            if (cnt[j] == 0) {
                // Re-seed from the point farthest from its own centroid.
                std::size_t far = 0;
                double fd = -1;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    const double d = std::abs(xs[i] - c[static_cast<std::size_t>(r.assign[i])]);
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                next = xs[far];
                if (fd > 0) converged = false;
            } else {
                next = sum[j] / static_cast<double>(cnt[j]);
            }
            if (std::abs(next - c[j]) > tol * std::max(std::abs(c[j]), 1e-12)) converged = false;
            c[j] = next;
        }
        if (converged) break;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) r.assign[i] = nearest(c, xs[i]);
    r.sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - c[static_cast<std::size_t>(r.assign[i])];
        r.sse += d * d;
    }
    r.centroids = std::move(c);
    return r;
}

std::vector<double> plus_plus_init(const std::vector<double>& xs, std::size_t k, std::mt19937_64& rng) {
    std::vector<double> c;
    std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
    c.push_back(xs[pick(rng)]);
    std::vector<double> d2(xs.size());
    while (c.size() < k) {
        double total = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double cj : c) best = std::min(best, (xs[i] - cj) * (xs[i] - cj));
            d2[i] = best;
            total += best;
        }
        if (total <= 0) {
            c.push_back(xs[pick(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        std::size_t i = 0;
        for (; i + 1 < xs.size(); ++i) {
            target -= d2[i];
            if (target <= 0) break;
        }
        c.push_back(xs[i]);
    }
    return c;
}

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Clusters positive features in log space; returns raw-unit centroids (ascending).
std::vector<double> cluster_features(std::span<const double> features, int k, const FitConfig& cfg) {
    std::vector<double> logs;
    logs.reserve(features.size());
    for (double f : features) {
        if (!(f > 0)) throw DomainError("frame features must be positive");
        logs.push_back(std::log(f));
    }
    const auto km = kmeans(logs, k, cfg.seed, cfg.tol, cfg.max_iter);
    std::vector<double> sum(km.centroids.size(), 0.0);
    std::vector<std::size_t> cnt(km.centroids.size(), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        sum[static_cast<std::size_t>(km.assignments[i])] += features[i];
        ++cnt[static_cast<std::size_t>(km.assignments[i])];
    }
    std::vector<double> raw;
    for (std::size_t j = 0; j < km.centroids.size(); ++j)
        raw.push_back(cnt[j] ? sum[j] / static_cast<double>(cnt[j]) : std::exp(km.centroids[j]));
    std::sort(raw.begin(), raw.end());
    return raw;
}

}  // namespace

KMeansResult kmeans(std::span<const double> features, int k, std::uint64_t seed, double tol, int max_iter,
                    int restarts) {
    if (k < 1) throw DomainError("k must be positive");
    if (features.size() < static_cast<std::size_t>(k))
        throw DomainError("k-means needs at least k=" + std::to_string(k) + " features, got " +
                          std::to_string(features.size()));
    const std::size_t n = features.size();
    const auto uk = static_cast<std::size_t>(k);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return features[a] < features[b]; });
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = features[order[i]];

    std::vector<double> init;
    for (std::size_t j = 0; j < uk; ++j) init.push_back(xs[(2 * j + 1) * n / (2 * uk)]);
    Lloyd best = run_lloyd(xs, init, tol, max_iter);

    std::mt19937_64 rng(seed);
    for (int r = 0; r < restarts; ++r) {
        Lloyd cand = run_lloyd(xs, plus_plus_init(xs, uk, rng), tol, max_iter);
        if (cand.sse < best.sse) best = std::move(cand);
    }

    // Ascending centroids, assignments mapped back to input order.
    std::vector<std::size_t> cidx(uk);
    std::iota(cidx.begin(), cidx.end(), 0);
    std::stable_sort(cidx.begin(), cidx.end(), [&](auto a, auto b) { return best.centroids[a] < best.centroids[b]; });
    std::vector<int> rank_of(uk);
    KMeansResult out;
    for (std::size_t r = 0; r < uk; ++r) {
        rank_of[cidx[r]] = static_cast<int>(r);
        out.centroids.push_back(best.centroids[cidx[r]]);
    }
    out.assignments.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        out.assignments[order[i]] = rank_of[static_cast<std::size_t>(best.assign[i])];
    out.sse = best.sse;
    out.iterations = best.iterations;
    return out;
}

std::vector<Centroid> map_clusters(std::span<const double> centroids) {
    if (centroids.size() < 3 || centroids.size() > 4)
        throw DomainError("expected 3 or 4 centroids, got " + std::to_string(centroids.size()));
    for (std::size_t i = 0; i < centroids.size(); ++i)
        for (std::size_t j = i + 1; j < centroids.size(); ++j)
            if (centroids[i] == centroids[j])
                throw DomainError("centroids " + std::to_string(i) + " and " + std::to_string(j) +
                                  " are equal; cannot order cluster types");
    std::vector<double> v(centroids.begin(), centroids.end());
    std::sort(v.begin(), v.end(), std::greater<>());
    static constexpr FrameType kOrder[] = {FrameType::I, FrameType::P, FrameType::B, FrameType::b};
    std::vector<Centroid> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i], kOrder[i]});
    return out;
}

bool ClassifierModel::has_type(FrameType t) const {
    return std::any_of(centroids.begin(), centroids.end(), [t](const Centroid& c) { return c.type == t; });
}

FrameType online_label(double feature, const ClassifierModel& model) {
    if (!model.fitted()) throw StateError("classifier model is not fitted");
    // Centroids are descending, so on equal distance the earlier (more
    // important) type is kept.
    const Centroid* best = &model.centroids.front();
    double bd = std::abs(feature - best->value);
    for (const auto& c : model.centroids) {
        const double d = std::abs(feature - c.value);
        if (d < bd) {
            bd = d;
            best = &c;
        }
    }
    return best->type;
}

std::vector<FrameType> label_frames(const BoundarySet& frames, const ClassifierModel& model) {
    std::vector<FrameType> out;
    out.reserve(frames.frame_features.size() + 1);
    for (double f : frames.frame_features) out.push_back(online_label(f, model));
    if (frames.trailing_feature) out.push_back(online_label(*frames.trailing_feature, model));
    return out;
}

std::vector<FrameType> broadcast_labels(const BoundarySet& frames, std::span<const FrameType> frame_labels,
                                        std::size_t n_packets) {
    const std::size_t expected = frames.boundaries.size() + (frames.trailing_feature ? 1 : 0);
    if (frame_labels.size() != expected) throw DomainError("frame label count does not match the boundary set");
    std::vector<FrameType> out(n_packets, FrameType::I);
    std::size_t begin = 0;
    for (std::size_t j = 0; j < frames.boundaries.size(); ++j) {
        const std::size_t end = std::min(frames.boundaries[j] + 1, n_packets);
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(begin), out.begin() + static_cast<std::ptrdiff_t>(end),
                  frame_labels[j]);
        begin = end;
    }
    if (frames.trailing_feature)
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(begin), out.end(), frame_labels.back());
    return out;
}

namespace {

void refine_run(std::vector<FrameType>& out, std::size_t i, std::size_t j, bool split_runs_without_b) {
    bool seen_b = false;
    for (std::size_t k = i; k < j; ++k) {
        if (out[k] == FrameType::b) seen_b = true;
        if (seen_b) out[k] = FrameType::b;
    }
    if (!seen_b && split_runs_without_b) {
        const std::size_t len = j - i;
        for (std::size_t k = j - (len + 1) / 2; k < j; ++k) out[k] = FrameType::b;
    }
}

}  // namespace

std::vector<FrameType> hierarchical_refine(std::span<const FrameType> types, bool split_runs_without_b,
                                           std::optional<std::size_t> max_run) {
    std::vector<FrameType> out(types.begin(), types.end());
    const std::size_t chunk = max_run && *max_run > 0 ? *max_run : out.size();
    std::size_t i = 0;
    while (i < out.size()) {
        if (is_anchor(out[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < out.size() && !is_anchor(out[j])) ++j;
        for (std::size_t c = i; c < j; c += chunk) refine_run(out, c, std::min(j, c + chunk), split_runs_without_b);
        i = j;
    }
    return out;
}

std::optional<int> typical_run_length(std::span<const FrameType> types) {
    std::map<int, int> freq;
    std::optional<std::size_t> last_anchor;
    for (std::size_t k = 0; k < types.size(); ++k) {
        if (!is_anchor(types[k])) continue;
        if (last_anchor && k > *last_anchor + 1) ++freq[static_cast<int>(k - *last_anchor - 1)];
        last_anchor = k;
    }
    std::optional<int> best;
    int best_count = 0;
    for (const auto& [len, count] : freq)
        if (count > best_count) {
            best = len;
            best_count = count;
        }
    return best;
}

SlicingMode sniff_mode(std::span<const double> sizes) {
    if (sizes.empty()) throw DomainError("cannot sniff slicing mode of an empty trace");
    const double m = mean_of(sizes);
    double var = 0;
    for (double s : sizes) var += (s - m) * (s - m);
    var /= static_cast<double>(sizes.size());
    return std::sqrt(var) / m < kFixedSizeCv ? SlicingMode::FixedBytesPerSlice : SlicingMode::FixedSlicesPerFrame;
}

ClassifierModel fit(const Trace& trace, const FitConfig& cfg) {
    if (cfg.kmeans_k < 3 || cfg.kmeans_k > 4) throw ConfigError("kmeans k must be 3 or 4");
    const auto all_sizes = packet_sizes(trace);
    const std::size_t n_cal = std::min(all_sizes.size(), cfg.calibration_packets.value_or(all_sizes.size()));
    const std::span<const double> sizes(all_sizes.data(), n_cal);
    if (sizes.empty()) throw DomainError("cannot fit an empty trace");

    ClassifierModel model;
    model.mode = cfg.mode.value_or(sniff_mode(sizes));
    model.calibration_end = n_cal;
    model.half_window = cfg.half_window;
    model.hierarchical = cfg.hierarchical;

    std::vector<double> features;
    if (model.mode == SlicingMode::FixedSlicesPerFrame) {
        const auto st = detect_slice_structure(sizes, cfg.slices);
        model.slices_per_frame = st.slices_per_frame;
        model.phase = st.phase;
        features = frame_sizes(sizes.subspan(st.phase), st.slices_per_frame);
    } else {
        const auto gaps = interarrival_gaps(trace);
        const auto ratios = bit_generation_ratio(sizes, std::span<const double>(gaps.data(), n_cal));
        const auto scores = change_scores(sizes, ratios, cfg.half_window);
        model.boundary_threshold = cfg.threshold.value_or(adaptive_threshold(scores, cfg.half_window, cfg.threshold_scale));
        const auto segments = detect_boundaries(sizes, ratios, cfg.half_window, model.boundary_threshold);
        if (segments.boundaries.empty()) throw DetectionError("no frame boundary found in the calibration span");
        const auto frames = align_to_frame_slots(segments, sizes, ratios);
        model.frame_period_us = frames.frame_period_us;
        features = frames.frame_features;
    }
    if (features.size() < static_cast<std::size_t>(cfg.kmeans_k))
        throw DomainError("calibration span holds " + std::to_string(features.size()) + " frames, fewer than k=" +
                          std::to_string(cfg.kmeans_k));

    auto centroids = cluster_features(features, cfg.kmeans_k, cfg);
    if (cfg.kmeans_k == 4 && cfg.auto_merge && (centroids[1] - centroids[0]) < 0.1 * centroids[1])
        centroids = cluster_features(features, 3, cfg);
    model.centroids = map_clusters(centroids);

    if (model.hierarchical) {
        std::vector<FrameType> labels;
        labels.reserve(features.size());
        for (double f : features) labels.push_back(online_label(f, model));
        model.minigop_length = typical_run_length(labels);
    }
    if (!model.gop_size && features.size() >= 2 * static_cast<std::size_t>(cfg.l_max))
        model.gop_size = detect_gop_size(features, cfg.l_max);
    return model;
}

std::vector<FrameType> classify_packets(const Trace& trace, const ClassifierModel& model) {
    if (!model.fitted()) throw StateError("classifier model is not fitted");
    const auto sizes = packet_sizes(trace);
    const std::size_t n = sizes.size();
    const bool split = model.hierarchical && !model.has_type(FrameType::b);

    BoundarySet frames;
    if (model.mode == SlicingMode::FixedSlicesPerFrame) {
        if (!model.slices_per_frame) throw StateError("model lacks slices per frame");
        const auto N = static_cast<std::size_t>(*model.slices_per_frame);
        // Partial frames at either end are scaled up to a full frame.
        auto add = [&](std::size_t begin, std::size_t end) {
            double s = 0;
            for (std::size_t i = begin; i < end; ++i) s += sizes[i];
            frames.boundaries.push_back(end - 1);
            frames.frame_features.push_back(s * static_cast<double>(N) / static_cast<double>(end - begin));
        };
        const std::size_t phase = std::min(model.phase, n);
        if (phase > 0) add(0, phase);
        for (std::size_t b = phase; b < n; b += N) add(b, std::min(n, b + N));
    } else {
        const auto gaps = interarrival_gaps(trace);
        const auto ratios = bit_generation_ratio(sizes, gaps);
        frames = detect_boundaries(sizes, ratios, model.half_window, model.boundary_threshold);
        frames = align_to_frame_slots(frames, sizes, ratios, model.frame_period_us);
    }
    std::optional<std::size_t> max_run;
    if (model.minigop_length) max_run = static_cast<std::size_t>(*model.minigop_length);
    const auto labels = hierarchical_refine(label_frames(frames, model), split, max_run);
    return broadcast_labels(frames, labels, n);
}

Trace label_trace(const Trace& trace, const ClassifierModel& model) {
    Trace out = trace;
    const auto labels = classify_packets(trace, model);
    for (std::size_t i = 0; i < labels.size(); ++i) out.packets[i].pred_type = labels[i];
    return out;
}

}  // namespace framesniff
