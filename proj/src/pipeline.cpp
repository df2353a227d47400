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

#include "framesniff/pipeline.hpp"

#include <sstream>

#include "framesniff/model.hpp"
#include "framesniff/synth.hpp"

namespace framesniff {
namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    const std::string prefix = std::string(name) + ": ";
    try {
        return f();
    } catch (const DetectionError& e) {
        throw DetectionError(prefix + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const IoError& e) {
        throw IoError(prefix + e.what());
    } catch (const StateError& e) {
        throw StateError(prefix + e.what());
    } catch (const DomainError& e) {
        throw DomainError(prefix + e.what());
    }
}

constexpr DropPolicy kPolicies[] = {DropPolicy::Smart, DropPolicy::GroundTruth, DropPolicy::Random};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void validate_config(const PipelineConfig& c) {
    builtin_profile(c.profile_id);
    if (c.gops < 1) throw ConfigError("gops must be at least 1");
    if (c.calibration_gops < 1) throw ConfigError("calibration_gops must be at least 1");
    if (c.noise_cv && *c.noise_cv < 0) throw ConfigError("noise cv must be non-negative");
    if (c.jitter_sigma_us < 0) throw ConfigError("jitter sigma must be non-negative");
    if (c.smoothing_span_us && !(*c.smoothing_span_us > 0)) throw ConfigError("smoothing span must be positive");
    for (double f : c.fractions)
        if (!(f >= 0 && f <= 1)) throw ConfigError("drop fractions must lie in [0, 1]");
    if (c.window_ms < 1) throw ConfigError("window_ms must be positive");
    if (c.kmeans_k && (*c.kmeans_k < 3 || *c.kmeans_k > 4)) throw ConfigError("kmeans k must be 3 or 4");
    if (c.l_max < 2) throw ConfigError("l_max must be at least 2");
}

Trace make_trace(const PipelineConfig& c) {
    validate_config(c);
    auto profile = builtin_profile(c.profile_id);
    profile.slicing_mode = c.mode;
    if (c.noise_cv) profile.size_noise_cv = *c.noise_cv;
    profile.smoothing = c.smoothing;

    Trace trace = stage("synth", [&] { return synth_trace(profile, c.gops, c.seed); });
    if (c.smoothing) trace = stage("smooth", [&] { return apply_smoothing(trace, c.smoothing_span_us); });
    if (c.jitter_mean_us != 0 || c.jitter_sigma_us != 0)
        trace = stage("jitter", [&] {
            return apply_jitter(trace, {c.jitter_mean_us, c.jitter_sigma_us, derive_seed(c.seed, 1)});
        });
    return trace;
}

FitConfig fit_config_for(const PipelineConfig& c, const StreamProfile& profile) {
    FitConfig f;
    f.mode = c.mode;
    f.hierarchical = c.hierarchical.value_or(profile.has_type(FrameType::b));
    f.kmeans_k = c.kmeans_k.value_or(f.hierarchical ? 4 : 3);
    f.threshold = c.threshold;
    f.l_max = c.l_max;
    f.seed = derive_seed(c.seed, 2);
    return f;
}

PipelineResult run_pipeline(const PipelineConfig& c) {
    PipelineResult res;
    Trace trace = make_trace(c);

    FitConfig fc = fit_config_for(c, trace.profile);
    // Calibrate on the packets that arrive during the first calibration_gops GoPs of airtime.
    const double cal_end_us = static_cast<double>(c.calibration_gops) *
                              static_cast<double>(trace.profile.gop_size()) * trace.profile.frame_period_us();
    std::size_t n_cal = 0;
    while (n_cal < trace.packets.size() && trace.packets[n_cal].ts_us <= cal_end_us) ++n_cal;
    fc.calibration_packets = n_cal;

    res.model = stage("fit", [&] { return fit(trace, fc); });
    res.trace = stage("label", [&] { return label_trace(trace, res.model); });
    res.confusion = stage("eval", [&] { return confusion_matrix(res.trace); });

    const auto truth = true_labels(res.trace);
    const auto pred = predicted_labels(res.trace);
    for (DropPolicy policy : kPolicies) {
        for (std::size_t fi = 0; fi < c.fractions.size(); ++fi) {
            const double f = c.fractions[fi];
            DropPlan plan = stage("drop", [&] {
                switch (policy) {
                    case DropPolicy::Smart: return plan_priority_drop(res.trace, pred, f, c.window_ms, policy);
                    case DropPolicy::GroundTruth: return plan_priority_drop(res.trace, truth, f, c.window_ms, policy);
                    case DropPolicy::Random: break;
                }
                return plan_random_drop(res.trace, f, derive_seed(c.seed, 100 + fi), c.window_ms);
            });
            res.drops.push_back(drop_report(res.trace, plan));
        }
    }

    auto& b = res.bundle;
    b["confusion"] = to_json(res.confusion);
    b["drops"] = nlohmann::ordered_json::object();
    for (const auto& r : res.drops) b["drops"][std::string(to_string(r.policy))][format6(r.target_fraction)] = to_json(r);
    b["model"] = to_json(res.model);
    b["config_echo"] = config_to_json(c);
    return res;
}

nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["profile"] = c.profile_id;
    j["mode"] = std::string(to_string(c.mode));
    j["gops"] = c.gops;
    j["calibration_gops"] = c.calibration_gops;
    j["seed"] = c.seed;
    j["noise_cv"] = c.noise_cv ? nlohmann::ordered_json(round6(*c.noise_cv)) : nlohmann::ordered_json(nullptr);
    j["jitter_mean_us"] = round6(c.jitter_mean_us);
    j["jitter_sigma_us"] = round6(c.jitter_sigma_us);
    j["smoothing"] = c.smoothing;
    j["smoothing_span_us"] =
        c.smoothing_span_us ? nlohmann::ordered_json(round6(*c.smoothing_span_us)) : nlohmann::ordered_json(nullptr);
    j["fractions"] = nlohmann::ordered_json::array();
    for (double f : c.fractions) j["fractions"].push_back(round6(f));
    j["window_ms"] = c.window_ms;
    j["kmeans_k"] = c.kmeans_k ? nlohmann::ordered_json(*c.kmeans_k) : nlohmann::ordered_json(nullptr);
    j["hierarchical"] = c.hierarchical ? nlohmann::ordered_json(*c.hierarchical) : nlohmann::ordered_json(nullptr);
    j["threshold"] = c.threshold ? nlohmann::ordered_json(round6(*c.threshold)) : nlohmann::ordered_json(nullptr);
    j["l_max"] = c.l_max;
    return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    try {
        c.profile_id = j.value("profile", c.profile_id);
        const auto mode = j.value("mode", std::string("bytes"));
        if (mode == "slices")
            c.mode = SlicingMode::FixedSlicesPerFrame;
        else if (mode == "bytes")
            c.mode = SlicingMode::FixedBytesPerSlice;
        else
            throw ConfigError("unknown mode '" + mode + "'");
        c.gops = j.value("gops", c.gops);
        c.calibration_gops = j.value("calibration_gops", c.calibration_gops);
        c.seed = j.value("seed", c.seed);
        auto opt_double = [&](const char* key) -> std::optional<double> {
            if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
            return j.at(key).get<double>();
        };
        c.noise_cv = opt_double("noise_cv");
        c.jitter_mean_us = j.value("jitter_mean_us", 0.0);
        c.jitter_sigma_us = j.value("jitter_sigma_us", 0.0);
        c.smoothing = j.value("smoothing", false);
        c.smoothing_span_us = opt_double("smoothing_span_us");
        if (j.contains("fractions")) c.fractions = j.at("fractions").get<std::vector<double>>();
        c.window_ms = j.value("window_ms", c.window_ms);
        if (j.contains("kmeans_k") && !j.at("kmeans_k").is_null()) c.kmeans_k = j.at("kmeans_k").get<int>();
        if (j.contains("hierarchical") && !j.at("hierarchical").is_null())
            c.hierarchical = j.at("hierarchical").get<bool>();
        c.threshold = opt_double("threshold");
        c.l_max = j.value("l_max", c.l_max);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    validate_config(c);
    return c;
}

std::string drops_csv(const PipelineResult& result) {
    std::ostringstream os;
    os << "policy,fraction,type,packets_dropped,bytes_dropped\n";
    for (const auto& r : result.drops)
        for (FrameType t : kAllTypes)
            os << to_string(r.policy) << ',' << format6(r.target_fraction) << ',' << to_char(t) << ','
               << r.packets_dropped[report_index(t)] << ',' << r.bytes_dropped[report_index(t)] << '\n';
    return os.str();
}

std::string accuracy_vs_jitter_csv(const PipelineConfig& base, const std::vector<JitterPoint>& levels) {
    std::ostringstream os;
    os << "jitter_mean_us,jitter_sigma_us,smoothing,I,P,B,b,overall,harmful_rate\n";
    for (const auto& lv : levels) {
        PipelineConfig c = base;
        c.jitter_mean_us = lv.mean_us;
        c.jitter_sigma_us = lv.sigma_us;
        c.fractions.clear();
        const auto res = run_pipeline(c);
        os << format6(lv.mean_us) << ',' << format6(lv.sigma_us) << ',' << (c.smoothing ? 1 : 0);
        for (FrameType t : kAllTypes) {
            os << ',';
            if (auto a = res.confusion.class_accuracy(t)) os << format6(*a);
        }
        os << ',' << format6(res.confusion.overall_accuracy()) << ',' << format6(res.confusion.harmful_rate())
           << '\n';
    }
    return os.str();
}

}  // namespace framesniff
