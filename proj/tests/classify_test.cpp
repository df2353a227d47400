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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "framesniff/model.hpp"
#include "framesniff/synth.hpp"

namespace framesniff {
namespace {

// Optimal 1-D clusterings are contiguous in sorted order, so trying every
// split of the sorted points into k runs gives the exact minimum SSE.
double exhaustive_sse(std::vector<double> x, int k) {
    std::sort(x.begin(), x.end());
    const int n = static_cast<int>(x.size());
    double best = std::numeric_limits<double>::infinity();
    auto run_sse = [&](int b, int e) {
        double m = 0;
        for (int i = b; i < e; ++i) m += x[static_cast<std::size_t>(i)];
        m /= e - b;
        double s = 0;
        for (int i = b; i < e; ++i) s += (x[static_cast<std::size_t>(i)] - m) * (x[static_cast<std::size_t>(i)] - m);
        return s;
    };
    auto rec = [&](auto&& self, int j, int start, double acc) -> void {
        if (j == k - 1) {
            best = std::min(best, acc + run_sse(start, n));
            return;
        }
        for (int e = start + 1; e <= n - (k - 1 - j); ++e) self(self, j + 1, e, acc + run_sse(start, e));
    };
    rec(rec, 0, 0, 0.0);
    return best;
}

std::vector<FrameType> types(std::string_view s) { return parse_pattern(s); }

ClassifierModel model_of(std::vector<double> centroids) {
    ClassifierModel m;
    m.centroids = map_clusters(centroids);
    return m;
}

TEST(KMeans, SeparatedGroups) {
    const std::vector<double> x{100, 101, 50, 51, 10, 11};
    const auto r = kmeans(x, 3, 1);
    EXPECT_EQ(r.centroids, (std::vector<double>{10.5, 50.5, 100.5}));
    EXPECT_DOUBLE_EQ(r.sse, exhaustive_sse(x, 3));
    EXPECT_EQ(r.assignments, (std::vector<int>{2, 2, 1, 1, 0, 0}));
}

TEST(KMeans, SeparatedGroupsReachExhaustiveOptimum) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> spread(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const int k = 3 + static_cast<int>(rng() % 2);
        std::vector<double> x;
        for (int c = 0; c < k; ++c) {
            const std::size_t n = 1 + rng() % 4;
            for (std::size_t i = 0; i < n; ++i) x.push_back(10.0 * c + spread(rng));
        }
        std::shuffle(x.begin(), x.end(), rng);
        const auto r = kmeans(x, k, static_cast<std::uint64_t>(t));
        EXPECT_NEAR(r.sse, exhaustive_sse(x, k), 1e-9 * std::max(1.0, r.sse)) << "case " << t;
    }
}

// On arbitrary data Lloyd's method stops at a local optimum: every point sits
// with its nearest centroid and every centroid is the mean of its points.
TEST(KMeans, ArbitraryDataReachesLloydFixedPoint) {
    std::mt19937_64 rng(8);
    std::lognormal_distribution<double> d(0.0, 0.8);
    for (int t = 0; t < 200; ++t) {
        const int k = 3 + static_cast<int>(rng() % 2);
        std::vector<double> x(static_cast<std::size_t>(k) + rng() % 9);
        for (auto& v : x) v = d(rng);
        const auto r = kmeans(x, k, static_cast<std::uint64_t>(t));
        ASSERT_TRUE(std::is_sorted(r.centroids.begin(), r.centroids.end()));
        EXPECT_GE(r.sse, exhaustive_sse(x, k) - 1e-12);
        std::vector<double> sum(static_cast<std::size_t>(k)), cnt(static_cast<std::size_t>(k));
        double sse = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto a = static_cast<std::size_t>(r.assignments[i]);
            for (double c : r.centroids) EXPECT_LE(std::abs(x[i] - r.centroids[a]), std::abs(x[i] - c) + 1e-9);
            sum[a] += x[i];
            cnt[a] += 1;
            sse += (x[i] - r.centroids[a]) * (x[i] - r.centroids[a]);
        }
        for (std::size_t j = 0; j < sum.size(); ++j)
            if (cnt[j] > 0) EXPECT_NEAR(r.centroids[j], sum[j] / cnt[j], 1e-6 * std::abs(r.centroids[j]));
        EXPECT_NEAR(r.sse, sse, 1e-9 * std::max(1.0, sse));
    }
}

TEST(KMeans, OnePointPerCluster) {
    const std::vector<double> x{4, 1, 9};
    const auto r = kmeans(x, 3, 0);
    EXPECT_EQ(r.centroids, (std::vector<double>{1, 4, 9}));
    EXPECT_EQ(r.sse, 0.0);
}

TEST(KMeans, IdenticalFeatures) {
    const std::vector<double> x(5, 3.5);
    EXPECT_EQ(kmeans(x, 1, 0).centroids, (std::vector<double>{3.5}));
}

TEST(KMeans, PermutationInvariant) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> d(0, 1);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> x;
        for (double c : {1.0, 3.0, 5.0, 8.0})
            for (int i = 0; i < 10; ++i) x.push_back(c + 0.4 * d(rng));
        const auto a = kmeans(x, 4, 5);
        std::shuffle(x.begin(), x.end(), rng);
        const auto b = kmeans(x, 4, 5);
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.centroids[i], b.centroids[i], 1e-6 * std::abs(a.centroids[i]));
    }
}

TEST(KMeans, TooFewFeatures) {
    EXPECT_THROW(kmeans(std::vector<double>{1, 2}, 3, 0), DomainError);
}

TEST(MapClusters, OrderDecidesType) {
    const auto m = map_clusters(std::vector<double>{100, 50, 20, 10});
    ASSERT_EQ(m.size(), 4u);
    EXPECT_EQ(m[0].type, FrameType::I);
    EXPECT_EQ(m[1].type, FrameType::P);
    EXPECT_EQ(m[2].type, FrameType::B);
    EXPECT_EQ(m[3].type, FrameType::b);
    const auto s = map_clusters(std::vector<double>{20, 100, 50});
    EXPECT_EQ(s[0].value, 100);
    EXPECT_EQ(s[0].type, FrameType::I);
    EXPECT_EQ(s[1].value, 50);
    EXPECT_EQ(s[2].value, 20);
    EXPECT_EQ(s[2].type, FrameType::B);
}

TEST(MapClusters, InvariantToClusterIds) {
    std::vector<double> c{7, 2, 11, 5};
    const auto a = map_clusters(c);
    std::sort(c.begin(), c.end());
    do {
        const auto b = map_clusters(c);
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_EQ(a[i].value, b[i].value);
            EXPECT_EQ(a[i].type, b[i].type);
        }
    } while (std::next_permutation(c.begin(), c.end()));
}

TEST(MapClusters, Errors) {
    EXPECT_THROW(map_clusters(std::vector<double>{1, 2}), DomainError);
    EXPECT_THROW(map_clusters(std::vector<double>{5, 3, 5}), DomainError);
}

TEST(OnlineLabel, NearestAndTies) {
    const auto m = model_of({100, 50, 20, 10});
    EXPECT_EQ(online_label(99, m), FrameType::I);
    EXPECT_EQ(online_label(35, m), FrameType::P);
    EXPECT_EQ(online_label(15, m), FrameType::B);
    for (const auto& c : m.centroids) EXPECT_EQ(online_label(c.value, m), c.type);
    EXPECT_THROW(online_label(1, ClassifierModel{}), StateError);
}

TEST(BroadcastLabels, EveryPacketOfAFrameShares) {
    BoundarySet b;
    b.boundaries = {2, 5, 6};
    b.frame_features = {9, 1, 4};
    b.trailing_feature = 9;
    const auto m = model_of({9, 4, 1});
    const auto frames = label_frames(b, m);
    EXPECT_EQ(format_pattern(frames), "I B P I");  // trailing partial frame last
    const auto pk = broadcast_labels(b, frames, 9);
    EXPECT_EQ(format_pattern(pk), "I I I B B B P I I");
}

TEST(HierarchicalRefine, Examples) {
    EXPECT_EQ(format_pattern(hierarchical_refine(types("PBbB"))), "P B b b");
    EXPECT_EQ(format_pattern(hierarchical_refine(types("PBBbbb"))), "P B B b b b");
    EXPECT_EQ(format_pattern(hierarchical_refine(types("IPBBBBPBB"), true)), "I P B B b b P B b");
    EXPECT_EQ(format_pattern(hierarchical_refine(types("IPBBBPBB"), true)), "I P B b b P B b");
}

TEST(HierarchicalRefine, ChunkedRuns) {
    const auto run = types("PBBbbbBBbbb");
    EXPECT_EQ(format_pattern(hierarchical_refine(run)), "P B B b b b b b b b b");
    EXPECT_EQ(format_pattern(hierarchical_refine(run, false, 5)), "P B B b b b B B b b b");
}

TEST(HierarchicalRefine, Idempotent) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 500; ++t) {
        std::vector<FrameType> v(1 + rng() % 30);
        for (auto& f : v) f = kAllTypes[rng() % 4];
        const bool split = rng() % 2;
        const std::optional<std::size_t> max_run =
            rng() % 2 ? std::optional<std::size_t>(2 + rng() % 5) : std::nullopt;
        const auto once = hierarchical_refine(v, split, max_run);
        EXPECT_EQ(hierarchical_refine(once, split, max_run), once);
        ASSERT_EQ(once.size(), v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            if (is_anchor(v[i])) EXPECT_EQ(once[i], v[i]);
    }
}

TEST(TypicalRunLength, ModeOfEnclosedRuns) {
    EXPECT_EQ(typical_run_length(types("IBBbPBBbPBBbbbbbbP")), 3);
    EXPECT_EQ(typical_run_length(types("IPPP")), std::nullopt);
    EXPECT_EQ(typical_run_length(types("IBBPBBBP")), 2);
}

TEST(SniffMode, Dispersion) {
    auto p = builtin_profile(2);
    EXPECT_EQ(sniff_mode(packet_sizes(synth_trace(p, 1, 1))), SlicingMode::FixedBytesPerSlice);
    p.slicing_mode = SlicingMode::FixedSlicesPerFrame;
    EXPECT_EQ(sniff_mode(packet_sizes(synth_trace(p, 1, 1))), SlicingMode::FixedSlicesPerFrame);
}

TEST(Fit, SlicesModeFindsStructure) {
    for (int id : {1, 3, 5}) {
        auto p = builtin_profile(id);
        p.slicing_mode = SlicingMode::FixedSlicesPerFrame;
        const auto t = synth_trace(p, 10, 2);
        FitConfig c;
        c.hierarchical = p.has_type(FrameType::b);
        c.kmeans_k = c.hierarchical ? 4 : 3;
        const auto m = fit(t, c);
        EXPECT_EQ(m.mode, SlicingMode::FixedSlicesPerFrame);
        EXPECT_EQ(m.slices_per_frame, 100);
        EXPECT_EQ(m.gop_size, static_cast<int>(p.gop_size()));
        EXPECT_TRUE(std::is_sorted(m.centroids.begin(), m.centroids.end(),
                                   [](const auto& a, const auto& b) { return a.value > b.value; }));
    }
}

TEST(Fit, IFrameCentroidNearExpectedBytes) {
    auto p = builtin_profile(2);
    p.slicing_mode = SlicingMode::FixedSlicesPerFrame;
    p.size_noise_cv = 0.0;
    FitConfig c;
    c.kmeans_k = 3;
    const auto m = fit(synth_trace(p, 10, 2), c);
    EXPECT_NEAR(m.centroids[0].value, expected_frame_bytes(p, FrameType::I), 100.0);
}

TEST(Fit, BytesModeSniffed) {
    const auto m = fit(synth_trace(builtin_profile(2), 10, 4), FitConfig{.kmeans_k = 3});
    EXPECT_EQ(m.mode, SlicingMode::FixedBytesPerSlice);
    EXPECT_TRUE(m.frame_period_us);
    EXPECT_EQ(m.centroids.size(), 3u);
}

TEST(Fit, TooFewFrames) {
    auto p = builtin_profile(2);
    Trace t = synth_trace(p, 1, 1);
    t.packets.resize(60);
    EXPECT_THROW(fit(t, FitConfig{.mode = SlicingMode::FixedBytesPerSlice, .kmeans_k = 3}), Error);
}

double accuracy(const Trace& t, std::size_t b, std::size_t e) {
    std::size_t ok = 0;
    for (std::size_t i = b; i < e; ++i) ok += t.packets[i].pred_type == t.packets[i].true_type;
    return static_cast<double>(ok) / static_cast<double>(e - b);
}

TEST(Classify, NoiselessTraceIsExact) {
    for (const auto& prof : builtin_profiles())
        for (SlicingMode mode : {SlicingMode::FixedSlicesPerFrame, SlicingMode::FixedBytesPerSlice}) {
            auto p = prof;
            p.slicing_mode = mode;
            p.size_noise_cv = 0;
            const auto t = synth_trace(p, 20, 1);
            FitConfig c;
            c.hierarchical = p.has_type(FrameType::b);
            c.kmeans_k = c.hierarchical ? 4 : 3;
            const auto labeled = label_trace(t, fit(t, c));
            EXPECT_EQ(accuracy(labeled, 0, labeled.packets.size()), 1.0)
                << "profile " << p.id << " " << to_string(mode);
        }
}

TEST(Classify, ContinuationMatchesCalibration) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto p = builtin_profile(2);
        const auto t = synth_trace(p, 30, seed);
        std::size_t cal = 0;
        const double cal_end = 10.0 * static_cast<double>(p.gop_size()) * p.frame_period_us();
        while (t.packets[cal].ts_us <= cal_end) ++cal;
        FitConfig c;
        c.kmeans_k = 3;
        c.calibration_packets = cal;
        const auto labeled = label_trace(t, fit(t, c));
        EXPECT_NEAR(accuracy(labeled, cal, labeled.packets.size()), accuracy(labeled, 0, cal), 0.02);
    }
}

TEST(Classify, UnfittedModel) {
    EXPECT_THROW(classify_packets(synth_trace(builtin_profile(1), 1, 1), ClassifierModel{}), StateError);
}

}  // namespace
}  // namespace framesniff
