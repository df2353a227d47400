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

#include "framesniff/report.hpp"

#include <gtest/gtest.h>

#include <random>

#include "framesniff/model.hpp"
#include "framesniff/synth.hpp"

namespace framesniff {
namespace {

Trace labeled(std::string_view truth, std::string_view pred, double gap_us = 1000) {
    const auto t = parse_pattern(truth);
    const auto p = parse_pattern(pred);
    Trace tr;
    for (std::size_t i = 0; i < t.size(); ++i) {
        PacketRecord r;
        r.seq = i;
        r.ts_us = static_cast<double>(i) * gap_us;
        r.size_bytes = 100 + static_cast<std::uint32_t>(i);
        r.true_type = t[i];
        r.pred_type = p[i];
        tr.packets.push_back(r);
    }
    return tr;
}

TEST(Confusion, Identity) {
    const auto m = confusion_matrix(labeled("IPBbbBPI", "IPBbbBPI"));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m.row_normalized[r][c], r == c ? 1.0 : 0.0);
    EXPECT_EQ(m.overall_accuracy(), 1.0);
    EXPECT_EQ(m.harmful_rate(), 0.0);
}

TEST(Confusion, HandCount) {
    const auto m = confusion_matrix(labeled("II", "IP"));
    EXPECT_EQ(m.row_normalized[0][0], 0.5);
    EXPECT_EQ(m.row_normalized[0][1], 0.5);
    EXPECT_EQ(m.row_normalized[0][2], 0.0);
    EXPECT_EQ(m.total(), 2);
    EXPECT_EQ(m.class_accuracy(FrameType::I), 0.5);
    EXPECT_EQ(m.class_accuracy(FrameType::b), std::nullopt);
}

TEST(Confusion, HarmfulRate) {
    const auto m = confusion_matrix(labeled("IIPPBb", "IbBPPI"));
    EXPECT_DOUBLE_EQ(m.harmful_rate(), 2.0 / 4.0);
}

TEST(Confusion, RowsSumToOneAndCountsToPackets) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
        std::string a, b;
        const std::size_t n = 1 + rng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            a += to_char(kAllTypes[rng() % 4]);
            b += to_char(kAllTypes[rng() % 4]);
        }
        const auto m = confusion_matrix(labeled(a, b));
        EXPECT_EQ(m.total(), static_cast<std::int64_t>(n));
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0;
            for (double v : m.row_normalized[r]) s += v;
            if (m.row_total(kAllTypes[r]) > 0) EXPECT_NEAR(s, 1.0, 1e-9);
        }
    }
}

TEST(Confusion, MissingLabels) {
    auto t = labeled("IP", "IP");
    t.packets[1].pred_type.reset();
    EXPECT_THROW(confusion_matrix(t), DomainError);
}

TEST(DropReportTest, NoDropsIsZero) {
    const auto t = labeled("IPBb", "IPBb");
    DropPlan plan;
    plan.decisions.assign(4, false);
    const auto r = drop_report(t, plan);
    EXPECT_EQ(r.total_packets_dropped, 0);
    EXPECT_EQ(r.total_bytes_dropped, 0);
    for (auto v : r.packets_dropped) EXPECT_EQ(v, 0);
    EXPECT_EQ(r.harmful_rate, 0.0);
}

TEST(DropReportTest, TotalsEqualPerTypeSums) {
    std::mt19937_64 rng(32);
    const auto t = labeled("IPBbbBPBbPIPBb", "IPBbbBPBbPIPBb");
    for (int trial = 0; trial < 50; ++trial) {
        DropPlan plan;
        for (std::size_t i = 0; i < t.packets.size(); ++i) plan.decisions.push_back(rng() % 2);
        const auto r = drop_report(t, plan);
        std::int64_t pk = 0, by = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            pk += r.packets_dropped[i];
            by += r.bytes_dropped[i];
        }
        EXPECT_EQ(pk, r.total_packets_dropped);
        EXPECT_EQ(by, r.total_bytes_dropped);
    }
}

TEST(DropReportTest, Errors) {
    auto t = labeled("IP", "IP");
    DropPlan plan;
    plan.decisions.assign(3, false);
    EXPECT_THROW(drop_report(t, plan), DomainError);
    plan.decisions.assign(2, false);
    t.packets[0].true_type.reset();
    EXPECT_THROW(drop_report(t, plan), DomainError);
}

TEST(WindowFractions, SkipsTrailingWindow) {
    // 10 packets per 10 ms window; the third window holds only 5.
    const auto t = labeled(std::string(25, 'P'), std::string(25, 'P'));
    DropPlan plan;
    plan.window_ms = 10;
    plan.decisions.assign(25, false);
    plan.decisions[0] = true;
    const auto f = window_drop_fractions(t, plan);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_NEAR(f[0], 100.0 / (10 * 100 + 45), 1e-12);
    EXPECT_EQ(f[1], 0.0);
}

TEST(Format, SixSignificantDigits) {
    EXPECT_EQ(format6(46296.296296), "46296.3");
    EXPECT_EQ(format6(0.1), "0.1");
    EXPECT_EQ(round6(1.23456789), 1.23457);
}

TEST(Json, ConfusionKeys) {
    const auto j = to_json(confusion_matrix(labeled("IPBb", "IPBB")));
    EXPECT_EQ(j["labels"], nlohmann::json({"I", "P", "B", "b"}));
    EXPECT_EQ(j["counts"][3][2], 1);
    EXPECT_EQ(j["class_accuracy"]["b"], 0.0);
    EXPECT_EQ(j["packets"], 4);
    EXPECT_TRUE(j.contains("overall_accuracy"));
    EXPECT_TRUE(j.contains("harmful_rate"));
}

TEST(Json, ModelRoundTrip) {
    ClassifierModel m;
    m.mode = SlicingMode::FixedSlicesPerFrame;
    m.slices_per_frame = 100;
    m.phase = 3;
    m.gop_size = 15;
    m.centroids = map_clusters(std::vector<double>{46296.3, 27777.8, 9259.26});
    m.calibration_begin = 0;
    m.calibration_end = 1500;
    m.half_window = 8;
    m.hierarchical = true;
    m.minigop_length = 5;
    const auto j = to_json(m);
    const auto back = model_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());
    EXPECT_EQ(back.slices_per_frame, 100);
    EXPECT_EQ(back.minigop_length, 5);
    EXPECT_FALSE(back.frame_period_us);
    EXPECT_THROW(model_from_json(nlohmann::json::parse("{\"mode\":\"slices\"}")), ConfigError);
}

}  // namespace
}  // namespace framesniff
