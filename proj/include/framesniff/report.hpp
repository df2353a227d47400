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

#include <array>
#include <cstdint>
#include <optional>

#include "json.hpp"

#include "framesniff/classify.hpp"
#include "framesniff/discard.hpp"
#include "framesniff/types.hpp"

namespace framesniff {

/// Rows are the actual type, columns the predicted one, both in report order I, P, B, b.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 4>, 4> counts{};
    std::array<std::array<double, 4>, 4> row_normalized{};

    std::int64_t total() const;
    std::int64_t row_total(FrameType actual) const;
    /// Row-normalized diagonal entry; nullopt when the class never occurs.
    std::optional<double> class_accuracy(FrameType t) const;
    double overall_accuracy() const;
    /// Share of I/P packets predicted as B/b.
    double harmful_rate() const;
};

ConfusionMatrix confusion_matrix(const Trace& trace);

struct DropReport {
    DropPolicy policy = DropPolicy::Smart;
    double target_fraction = 0.0;
    std::array<std::int64_t, 4> packets_dropped{};  // by true type, report order
    std::array<std::int64_t, 4> bytes_dropped{};
    std::int64_t total_packets_dropped = 0;
    std::int64_t total_bytes_dropped = 0;
    std::int64_t stream_bytes = 0;
    std::optional<double> harmful_rate;  // set when the trace carries predictions
    double max_window_deviation = 0.0;   // over complete accounting windows

    std::int64_t reference_bytes_dropped() const {
        return bytes_dropped[report_index(FrameType::I)] + bytes_dropped[report_index(FrameType::P)];
    }
};

DropReport drop_report(const Trace& trace, const DropPlan& plan);

/// Dropped-byte fraction of every accounting window except the last one,
/// which the trace may cover only partly.
std::vector<double> window_drop_fractions(const Trace& trace, const DropPlan& plan);

/// Rounds to six significant digits, the precision of every float in reports.
double round6(double v);
std::string format6(double v);

nlohmann::ordered_json to_json(const ConfusionMatrix& m);
nlohmann::ordered_json to_json(const DropReport& r);
nlohmann::ordered_json to_json(const ClassifierModel& m);
ClassifierModel model_from_json(const nlohmann::json& j);

}  // namespace framesniff
