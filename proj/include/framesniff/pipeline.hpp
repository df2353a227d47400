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
#include <string>
#include <vector>

#include "json.hpp"

#include "framesniff/classify.hpp"
#include "framesniff/discard.hpp"
#include "framesniff/report.hpp"

namespace framesniff {

struct PipelineConfig {
    int profile_id = 2;
    SlicingMode mode = SlicingMode::FixedBytesPerSlice;
    int gops = 20;
    int calibration_gops = 10;
    std::uint64_t seed = 1;
    std::optional<double> noise_cv;  // profile default when unset
    double jitter_mean_us = 0.0;
    double jitter_sigma_us = 0.0;
    bool smoothing = false;
    std::optional<double> smoothing_span_us;
    std::vector<double> fractions{0.01, 0.03, 0.10};
    int window_ms = kDefaultDropWindowMs;
    std::optional<int> kmeans_k;        // 4 for hierarchical streams, else 3
    std::optional<bool> hierarchical;   // profile contains b-frames when unset
    std::optional<double> threshold;    // fixed change-score threshold
    int l_max = 31;
};

struct PipelineResult {
    Trace trace;  // labeled
    ClassifierModel model;
    ConfusionMatrix confusion;
    std::vector<DropReport> drops;  // policy-major: smart, truth, random; then fractions
    nlohmann::ordered_json bundle;
};

/// Independent stream seed derived from the configuration seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Throws ConfigError on invalid settings.
void validate_config(const PipelineConfig& config);

/// Generated (and smoothed/jittered) trace without labels applied.
Trace make_trace(const PipelineConfig& config);

FitConfig fit_config_for(const PipelineConfig& config, const StreamProfile& profile);

/// synth -> smoothing -> jitter -> fit -> label -> drop plans -> reports.
/// Stage failures are rethrown with the stage name prefixed.
PipelineResult run_pipeline(const PipelineConfig& config);

nlohmann::ordered_json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

/// CSV series for plotting.
std::string drops_csv(const PipelineResult& result);

struct JitterPoint {
    double mean_us;
    double sigma_us;
};

/// Per-class accuracy for each jitter level (sigma = mean / 3 by default levels).
std::string accuracy_vs_jitter_csv(const PipelineConfig& base, const std::vector<JitterPoint>& levels);

}  // namespace framesniff
