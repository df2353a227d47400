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

#include <cmath>
#include <cstdio>
#include <map>

namespace framesniff {

using nlohmann::ordered_json;

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (const auto& row : counts)
        for (auto c : row) s += c;
    return s;
}

std::int64_t ConfusionMatrix::row_total(FrameType actual) const {
    std::int64_t s = 0;
    for (auto c : counts[report_index(actual)]) s += c;
    return s;
}

std::optional<double> ConfusionMatrix::class_accuracy(FrameType t) const {
    if (row_total(t) == 0) return std::nullopt;
    return row_normalized[report_index(t)][report_index(t)];
}

double ConfusionMatrix::overall_accuracy() const {
    const auto n = total();
    if (n == 0) return 0.0;
    std::int64_t diag = 0;
    for (std::size_t i = 0; i < 4; ++i) diag += counts[i][i];
    return static_cast<double>(diag) / static_cast<double>(n);
}

double ConfusionMatrix::harmful_rate() const {
    std::int64_t ref = 0;
    std::int64_t harmful = 0;
    for (FrameType a : {FrameType::I, FrameType::P}) {
        ref += row_total(a);
        for (FrameType p : {FrameType::B, FrameType::b}) harmful += counts[report_index(a)][report_index(p)];
    }
    return ref == 0 ? 0.0 : static_cast<double>(harmful) / static_cast<double>(ref);
}

ConfusionMatrix confusion_matrix(const Trace& trace) {
    ConfusionMatrix m;
    for (const auto& p : trace.packets) {
        if (!p.true_type || !p.pred_type)
            throw DomainError("packet " + std::to_string(p.seq) + " lacks a true or predicted type");
        ++m.counts[report_index(*p.true_type)][report_index(*p.pred_type)];
    }
    for (std::size_t r = 0; r < 4; ++r) {
        std::int64_t row = 0;
        for (auto c : m.counts[r]) row += c;
        for (std::size_t c = 0; c < 4; ++c)
            m.row_normalized[r][c] = row ? static_cast<double>(m.counts[r][c]) / static_cast<double>(row) : 0.0;
    }
    return m;
}

std::vector<double> window_drop_fractions(const Trace& trace, const DropPlan& plan) {
    if (plan.decisions.size() != trace.packets.size()) throw DomainError("drop plan does not match the trace");
    std::map<std::int64_t, std::pair<double, double>> windows;  // index -> (dropped, total)
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        const auto& p = trace.packets[i];
        auto& w = windows[window_index(p, plan.window_ms)];
        w.second += p.size_bytes;
        if (plan.decisions[i]) w.first += p.size_bytes;
    }
    std::vector<double> out;
    if (windows.size() < 2) return out;
    windows.erase(std::prev(windows.end()));
    for (const auto& [idx, w] : windows) out.push_back(w.first / w.second);
    return out;
}

DropReport drop_report(const Trace& trace, const DropPlan& plan) {
    if (plan.decisions.size() != trace.packets.size()) throw DomainError("drop plan does not match the trace");
    DropReport r;
    r.policy = plan.policy;
    r.target_fraction = plan.target_fraction;
    bool have_pred = true;
    std::int64_t ref = 0;
    std::int64_t harmful = 0;
    for (std::size_t i = 0; i < trace.packets.size(); ++i) {
        const auto& p = trace.packets[i];
        if (!p.true_type) throw DomainError("packet " + std::to_string(p.seq) + " has no true type");
        r.stream_bytes += p.size_bytes;
        if (plan.decisions[i]) {
            const auto k = report_index(*p.true_type);
            ++r.packets_dropped[k];
            r.bytes_dropped[k] += p.size_bytes;
            ++r.total_packets_dropped;
            r.total_bytes_dropped += p.size_bytes;
        }
        if (!p.pred_type) {
            have_pred = false;
        } else if (is_anchor(*p.true_type)) {
            ++ref;
            if (!is_anchor(*p.pred_type)) ++harmful;
        }
    }
    if (have_pred && !trace.packets.empty())
        r.harmful_rate = ref ? static_cast<double>(harmful) / static_cast<double>(ref) : 0.0;
    for (double f : window_drop_fractions(trace, plan))
        r.max_window_deviation = std::max(r.max_window_deviation, std::abs(f - plan.target_fraction));
    return r;
}

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double round6(double v) { return std::stod(format6(v)); }

namespace {

ordered_json by_type(const std::array<std::int64_t, 4>& v) {
    ordered_json j;
    for (FrameType t : kAllTypes) j[std::string(1, to_char(t))] = v[report_index(t)];
    return j;
}

}  // namespace

ordered_json to_json(const ConfusionMatrix& m) {
    ordered_json j;
    j["labels"] = {"I", "P", "B", "b"};
    j["counts"] = ordered_json::array();
    j["row_normalized"] = ordered_json::array();
    for (std::size_t r = 0; r < 4; ++r) {
        ordered_json counts = ordered_json::array();
        ordered_json norm = ordered_json::array();
        for (std::size_t c = 0; c < 4; ++c) {
            counts.push_back(m.counts[r][c]);
            norm.push_back(round6(m.row_normalized[r][c]));
        }
        j["counts"].push_back(counts);
        j["row_normalized"].push_back(norm);
    }
    ordered_json acc;
    for (FrameType t : kAllTypes) {
        auto a = m.class_accuracy(t);
        acc[std::string(1, to_char(t))] = a ? ordered_json(round6(*a)) : ordered_json(nullptr);
    }
    j["class_accuracy"] = acc;
    j["overall_accuracy"] = round6(m.overall_accuracy());
    j["harmful_rate"] = round6(m.harmful_rate());
    j["packets"] = m.total();
    return j;
}

ordered_json to_json(const DropReport& r) {
    ordered_json j;
    j["policy"] = std::string(to_string(r.policy));
    j["target_fraction"] = round6(r.target_fraction);
    j["packets_dropped"] = by_type(r.packets_dropped);
    j["bytes_dropped"] = by_type(r.bytes_dropped);
    j["total_packets_dropped"] = r.total_packets_dropped;
    j["total_bytes_dropped"] = r.total_bytes_dropped;
    j["stream_bytes"] = r.stream_bytes;
    j["dropped_fraction"] =
        round6(r.stream_bytes ? static_cast<double>(r.total_bytes_dropped) / static_cast<double>(r.stream_bytes) : 0.0);
    j["max_window_deviation"] = round6(r.max_window_deviation);
    j["harmful_rate"] = r.harmful_rate ? ordered_json(round6(*r.harmful_rate)) : ordered_json(nullptr);
    return j;
}

ordered_json to_json(const ClassifierModel& m) {
    ordered_json j;
    j["mode"] = std::string(to_string(m.mode));
    j["N"] = m.slices_per_frame ? ordered_json(*m.slices_per_frame) : ordered_json(nullptr);
    j["phase"] = m.phase;
    j["gop_size"] = m.gop_size ? ordered_json(*m.gop_size) : ordered_json(nullptr);
    j["centroids"] = ordered_json::array();
    for (const auto& c : m.centroids)
        j["centroids"].push_back({{"type", std::string(1, to_char(c.type))}, {"value", round6(c.value)}});
    j["calibration_span"] = {m.calibration_begin, m.calibration_end};
    j["boundary_threshold"] = round6(m.boundary_threshold);
    j["frame_period_us"] = m.frame_period_us ? ordered_json(round6(*m.frame_period_us)) : ordered_json(nullptr);
    j["half_window"] = m.half_window;
    j["hierarchical"] = m.hierarchical;
    j["minigop_length"] = m.minigop_length ? ordered_json(*m.minigop_length) : ordered_json(nullptr);
    return j;
}

ClassifierModel model_from_json(const nlohmann::json& j) {
    try {
        ClassifierModel m;
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "slices")
            m.mode = SlicingMode::FixedSlicesPerFrame;
        else if (mode == "bytes")
            m.mode = SlicingMode::FixedBytesPerSlice;
        else
            throw ConfigError("unknown mode '" + mode + "' in model");
        if (!j.at("N").is_null()) m.slices_per_frame = j.at("N").get<int>();
        m.phase = j.value("phase", std::size_t{0});
        if (!j.at("gop_size").is_null()) m.gop_size = j.at("gop_size").get<int>();
        for (const auto& c : j.at("centroids")) {
            const auto t = c.at("type").get<std::string>();
            auto ft = t.size() == 1 ? frame_type_from_char(t[0]) : std::nullopt;
            if (!ft) throw ConfigError("bad centroid type '" + t + "' in model");
            m.centroids.push_back({c.at("value").get<double>(), *ft});
        }
        const auto span = j.at("calibration_span");
        m.calibration_begin = span.at(0).get<std::size_t>();
        m.calibration_end = span.at(1).get<std::size_t>();
        m.boundary_threshold = j.at("boundary_threshold").get<double>();
        if (j.contains("frame_period_us") && !j.at("frame_period_us").is_null())
            m.frame_period_us = j.at("frame_period_us").get<double>();
        m.half_window = j.at("half_window").get<int>();
        m.hierarchical = j.at("hierarchical").get<bool>();
        if (j.contains("minigop_length") && !j.at("minigop_length").is_null())
            m.minigop_length = j.at("minigop_length").get<int>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model: ") + e.what());
    }
}

}  // namespace framesniff
