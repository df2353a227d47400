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

#include "framesniff/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace framesniff {
namespace {

std::string sorted_pattern(std::vector<FrameType> v) {
    std::sort(v.begin(), v.end());
    return format_pattern(v);
}

TEST(Pattern, RoundTrip) {
    const auto v = parse_pattern("I B b P");
    EXPECT_EQ(format_pattern(v), "I B b P");
    EXPECT_THROW(parse_pattern("IXP"), DomainError);
}

TEST(BuiltinProfiles, TableRows) {
    const auto all = builtin_profiles();
    ASSERT_EQ(all.size(), 5u);
    EXPECT_EQ(format_pattern(builtin_profile(1).gop_display), "I B B P B B P B B P B B");
    EXPECT_EQ(builtin_profile(1).anchor_distance, 3);
    EXPECT_EQ(format_pattern(builtin_profile(5).gop_display), "I b B b B b P b B b B b P b B b B b");
    EXPECT_EQ(builtin_profile(5).anchor_distance, 6);
    EXPECT_EQ(format_pattern(builtin_profile(5).gop_coding).substr(0, 15), "I P B B b b b P");
    for (const auto& p : all) {
        EXPECT_EQ(p.bitrate_bps, 4'000'000);
        EXPECT_DOUBLE_EQ(p.fps, 30.0);
        EXPECT_NO_THROW(validate_profile(p));
    }
    EXPECT_THROW(builtin_profile(6), ConfigError);
}

TEST(BuiltinProfiles, CodingOrderIsPermutation) {
    for (const auto& p : builtin_profiles()) {
        EXPECT_EQ(sorted_pattern(p.gop_coding), sorted_pattern(p.gop_display)) << "profile " << p.id;
        EXPECT_EQ(p.gop_coding.front(), FrameType::I);
    }
}

TEST(CodingOrder, AnchorsPrecedeTheirNonAnchors) {
    EXPECT_EQ(format_pattern(coding_order(parse_pattern("IBBPBBPBB"))), "I P B B P B B B B");
    EXPECT_EQ(format_pattern(coding_order(parse_pattern("IbBbPbBb"))), "I P B b b B b b");
    EXPECT_EQ(format_pattern(coding_order(parse_pattern("I P P P"))), "I P P P");
}

TEST(ValidateProfile, RejectsBrokenInvariants) {
    auto p = builtin_profile(2);
    auto bad = p;
    bad.gop_display[3] = FrameType::I;
    EXPECT_THROW(validate_profile(bad), Error);
    bad = p;
    std::swap(bad.complexity_weights[rank(FrameType::I)], bad.complexity_weights[rank(FrameType::P)]);
    EXPECT_THROW(validate_profile(bad), Error);
    bad = p;
    bad.gop_coding.pop_back();
    EXPECT_THROW(validate_profile(bad), Error);
    bad = p;
    bad.fps = 0;
    EXPECT_THROW(validate_profile(bad), Error);
}

TEST(ExpectedFrameBytes, WorkedExample) {
    const auto p = builtin_profile(2);
    EXPECT_NEAR(expected_frame_bytes(p, FrameType::I), 46296.3, 0.05);
    EXPECT_NEAR(expected_frame_bytes(p, FrameType::I) / kAccountingUnitBytes, 46.29, 0.01);
    EXPECT_NEAR(expected_frame_bytes(p, FrameType::B), 250000.0 / 27.0, 1e-6);
    EXPECT_THROW(expected_frame_bytes(p, FrameType::b), DomainError);
}

TEST(ExpectedFrameBytes, UniformWeightsGiveFrameBudget) {
    auto p = builtin_profile(5);
    p.complexity_weights = {1, 1, 1, 1};
    for (FrameType t : kAllTypes) EXPECT_NEAR(expected_frame_bytes(p, t), 4e6 / 8 / 30, 1e-9);
}

TEST(ExpectedFrameBytes, GopConservesBytes) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = builtin_profile(1 + trial % 5);
        // Random weights that keep the I > P > B >= b ordering.
        double w = 10.0;
        for (FrameType t : kAllTypes) p.complexity_weights[static_cast<std::size_t>(rank(t))] = w *= u(rng);
        double total = 0;
        for (FrameType t : p.gop_display) total += expected_frame_bytes(p, t);
        EXPECT_NEAR(total, p.bitrate_bps / 8.0 / p.fps * static_cast<double>(p.gop_size()), 1e-6);
    }
}

TEST(ExpectedInterarrival, WorkedExample) {
    const auto p = builtin_profile(2);
    EXPECT_NEAR(expected_interarrival_us(p, FrameType::I, 1000), 720.0, 1e-9);
    EXPECT_NEAR(expected_interarrival_us(p, FrameType::P, 1000), 1200.0, 1e-9);
    EXPECT_NEAR(expected_interarrival_us(p, FrameType::B, 1000), 3600.0, 1e-9);
}

TEST(ExpectedInterarrival, OrderedByImportance) {
    for (const auto& p : builtin_profiles()) {
        double prev = 0;
        for (FrameType t : kAllTypes) {
            if (!p.has_type(t)) continue;
            const double g = expected_interarrival_us(p, t);
            EXPECT_GT(g, prev) << "profile " << p.id << " type " << to_char(t);
            prev = g;
        }
    }
}

TEST(ExpectedInterarrival, SlicesModeRejected) {
    auto p = builtin_profile(2);
    p.slicing_mode = SlicingMode::FixedSlicesPerFrame;
    EXPECT_THROW(expected_interarrival_us(p, FrameType::I), DomainError);
}

}  // namespace
}  // namespace framesniff
