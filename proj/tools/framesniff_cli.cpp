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

// framesniff: command line front end.
//
//   framesniff synth --profile 2 --mode bytes --gops 20 --out trace.csv
//   framesniff jitter --in trace.csv --jitter-mean 72 --jitter-sigma 24 --out jittered.csv
//   framesniff fit --in jittered.csv --profile 2 --out model.json
//   framesniff label --in jittered.csv --model model.json --out labeled.csv
//   framesniff eval --in labeled.csv
//   framesniff drop --in labeled.csv --policy smart --fraction 0.03 --out dropped.csv
//   framesniff pipeline --profile 2 --jitter-mean 72 --jitter-sigma 24 --out bundle.json --csv-dir plots/

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "framesniff/classify.hpp"
#include "framesniff/detect.hpp"
#include "framesniff/discard.hpp"
#include "framesniff/model.hpp"
#include "framesniff/pipeline.hpp"
#include "framesniff/report.hpp"
#include "framesniff/synth.hpp"
#include "framesniff/trace_io.hpp"

namespace fs = framesniff;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDetection = 3;
constexpr int kExitIo = 4;

const std::map<std::string, fs::SlicingMode> kModes{{"slices", fs::SlicingMode::FixedSlicesPerFrame},
                                                     {"bytes", fs::SlicingMode::FixedBytesPerSlice}};
const std::map<std::string, fs::DropPolicy> kPolicyNames{
    {"smart", fs::DropPolicy::Smart}, {"truth", fs::DropPolicy::GroundTruth}, {"random", fs::DropPolicy::Random}};

void emit_text(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw fs::IoError("cannot open " + out + " for writing");
    f << text;
    if (!f) throw fs::IoError("write to " + out + " failed");
}

void emit_json(const nlohmann::ordered_json& j, const std::string& out) { emit_text(j.dump(2) + "\n", out); }

void emit_trace(const fs::Trace& t, const std::string& out) {
    if (out.empty() || out == "-")
        fs::write_trace(t, std::cout);
    else
        fs::write_trace(t, std::filesystem::path(out));
}

fs::Trace load_trace(const std::string& in) {
    if (in == "-") return fs::read_trace(std::cin);
    return fs::read_trace(std::filesystem::path(in));
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw fs::IoError("cannot open " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw fs::ConfigError(path + ": " + e.what());
    }
}

struct Options {
    std::string in = "-";
    std::string out;
    std::string model;
    std::string csv_dir;
    std::string config;
    int profile = 2;
    std::string mode_name = "bytes";
    fs::SlicingMode mode = fs::SlicingMode::FixedBytesPerSlice;
    int gops = 20;
    int calibration_gops = 10;
    std::uint64_t seed = 1;
    double noise_cv = -1;
    double jitter_mean = 0;
    double jitter_sigma = 0;
    bool smoothing = false;
    double span_us = 0;
    std::vector<double> fractions;
    std::string policy_name = "smart";
    fs::DropPolicy policy = fs::DropPolicy::Smart;
    int window_ms = fs::kDefaultDropWindowMs;
    int l_max = 31;
    int kmeans_k = 0;
    double threshold = 0;
    bool hierarchical = false;
    bool flat = false;
    std::size_t calibration_packets = 0;
    bool sweep_jitter = false;
};

fs::FitConfig fit_config(const Options& o, CLI::App* cmd) {
    fs::FitConfig f;
    if (cmd->count("--mode")) f.mode = o.mode;
    f.hierarchical = o.hierarchical ? true : (o.flat ? false : fs::builtin_profile(o.profile).has_type(fs::FrameType::b));
    f.kmeans_k = o.kmeans_k ? o.kmeans_k : (f.hierarchical ? 4 : 3);
    if (cmd->count("--threshold")) f.threshold = o.threshold;
    f.l_max = o.l_max;
    f.seed = o.seed;
    if (o.calibration_packets) f.calibration_packets = o.calibration_packets;
    return f;
}

fs::PipelineConfig pipeline_config(const Options& o, CLI::App* cmd) {
    fs::PipelineConfig c = o.config.empty() ? fs::PipelineConfig{} : fs::config_from_json(load_json(o.config));
    if (cmd->count("--profile")) c.profile_id = o.profile;
    if (cmd->count("--mode")) c.mode = o.mode;
    if (cmd->count("--gops")) c.gops = o.gops;
    if (cmd->count("--calibration-gops")) c.calibration_gops = o.calibration_gops;
    if (cmd->count("--seed")) c.seed = o.seed;
    if (cmd->count("--noise-cv")) c.noise_cv = o.noise_cv;
    if (cmd->count("--jitter-mean")) c.jitter_mean_us = o.jitter_mean;
    if (cmd->count("--jitter-sigma")) c.jitter_sigma_us = o.jitter_sigma;
    if (o.smoothing) c.smoothing = true;
    if (cmd->count("--span-us")) c.smoothing_span_us = o.span_us;
    if (cmd->count("--fraction")) c.fractions = o.fractions;
    if (cmd->count("--window-ms")) c.window_ms = o.window_ms;
    if (cmd->count("--l-max")) c.l_max = o.l_max;
    if (cmd->count("--kmeans-k")) c.kmeans_k = o.kmeans_k;
    if (cmd->count("--threshold")) c.threshold = o.threshold;
    if (o.hierarchical) c.hierarchical = true;
    if (o.flat) c.hierarchical = false;
    fs::validate_config(c);
    return c;
}

int run_synth(const Options& o, CLI::App* cmd) {
    auto p = fs::builtin_profile(o.profile);
    if (cmd->count("--mode")) p.slicing_mode = o.mode;
    if (cmd->count("--noise-cv")) p.size_noise_cv = o.noise_cv;
    emit_trace(fs::synth_trace(p, o.gops, o.seed), o.out);
    return 0;
}

int run_jitter(const Options& o) {
    emit_trace(fs::apply_jitter(load_trace(o.in), {o.jitter_mean, o.jitter_sigma, o.seed}), o.out);
    return 0;
}

int run_smooth(const Options& o, CLI::App* cmd) {
    auto t = load_trace(o.in);
    t.profile = fs::builtin_profile(o.profile);
    std::optional<double> span;
    if (cmd->count("--span-us")) span = o.span_us;
    emit_trace(fs::apply_smoothing(t, span), o.out);
    return 0;
}

int run_fit(const Options& o, CLI::App* cmd) {
    const auto m = fs::fit(load_trace(o.in), fit_config(o, cmd));
    emit_json(fs::to_json(m), o.out);
    return 0;
}

int run_label(const Options& o) {
    const auto m = fs::model_from_json(load_json(o.model));
    emit_trace(fs::label_trace(load_trace(o.in), m), o.out);
    return 0;
}

int run_gop(const Options& o, CLI::App* cmd) {
    const auto t = load_trace(o.in);
    const auto sizes = fs::packet_sizes(t);
    const auto mode = cmd->count("--mode") ? o.mode : fs::sniff_mode(sizes);
    nlohmann::ordered_json j;
    j["mode"] = std::string(fs::to_string(mode));
    std::vector<double> frames;
    if (mode == fs::SlicingMode::FixedSlicesPerFrame) {
        const auto s = fs::detect_slice_structure(sizes);
        j["N"] = s.slices_per_frame;
        j["phase"] = s.phase;
        frames = fs::frame_sizes(std::span<const double>(sizes).subspan(s.phase), s.slices_per_frame);
    } else {
        auto f = fit_config(o, cmd);
        f.mode = mode;
        const auto m = fs::fit(t, f);
        const auto ratios = fs::bit_generation_ratio(sizes, fs::interarrival_gaps(t));
        const auto b = fs::align_to_frame_slots(fs::detect_boundaries(sizes, ratios, m.half_window, m.boundary_threshold),
                                                sizes, ratios, m.frame_period_us);
        frames = b.frame_features;
        j["boundaries"] = b.boundaries.size();
    }
    j["frames"] = frames.size();
    j["gop_size"] = fs::detect_gop_size(frames, o.l_max);
    emit_json(j, o.out);
    return 0;
}

int run_drop(const Options& o) {
    const auto t = load_trace(o.in);
    const double f = o.fractions.empty() ? 0.01 : o.fractions.front();
    fs::DropPlan plan;
    switch (o.policy) {
        case fs::DropPolicy::Smart:
            plan = fs::plan_priority_drop(t, fs::predicted_labels(t), f, o.window_ms, o.policy);
            break;
        case fs::DropPolicy::GroundTruth:
            plan = fs::plan_priority_drop(t, fs::true_labels(t), f, o.window_ms, o.policy);
            break;
        case fs::DropPolicy::Random:
            plan = fs::plan_random_drop(t, f, o.seed, o.window_ms);
            break;
    }
    std::cerr << fs::to_json(fs::drop_report(t, plan)).dump(2) << '\n';
    emit_trace(fs::apply_plan(t, plan), o.out);
    return 0;
}

int run_eval(const Options& o) {
    emit_json(fs::to_json(fs::confusion_matrix(load_trace(o.in))), o.out);
    return 0;
}

int run_pipeline_cmd(const Options& o, CLI::App* cmd) {
    const auto c = pipeline_config(o, cmd);
    const auto res = fs::run_pipeline(c);
    emit_json(res.bundle, o.out);
    if (!o.csv_dir.empty()) {
        std::filesystem::create_directories(o.csv_dir);
        const std::filesystem::path dir(o.csv_dir);
        emit_text(fs::drops_csv(res), (dir / "drops_by_type.csv").string());
        std::ostringstream acc;
        acc << "class,accuracy\n";
        for (auto t : fs::kAllTypes) {
            acc << fs::to_char(t) << ',';
            if (auto a = res.confusion.class_accuracy(t)) acc << fs::format6(*a);
            acc << '\n';
        }
        emit_text(acc.str(), (dir / "accuracy_by_class.csv").string());
        if (o.sweep_jitter) {
            std::vector<fs::JitterPoint> levels{{0, 0}, {72, 24}, {144, 48}, {288, 96}};
            emit_text(fs::accuracy_vs_jitter_csv(c, levels), (dir / "accuracy_vs_jitter.csv").string());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frame-type identification and selective discard for sliced video packet streams"};
    app.require_subcommand(1);
    Options o;

    auto add_in = [&](CLI::App* c) { c->add_option("--in", o.in, "input trace CSV ('-' for stdin)"); };
    auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "output path (stdout when omitted)"); };
    auto add_profile = [&](CLI::App* c) {
        c->add_option("--profile", o.profile, "stream profile")->check(CLI::Range(1, 5));
    };
    auto add_mode = [&](CLI::App* c) {
        c->add_option("--mode", o.mode_name, "slicing mode")->check(CLI::IsMember(kModes, CLI::ignore_case));
    };
    auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "random seed"); };
    auto add_jitter = [&](CLI::App* c) {
        c->add_option("--jitter-mean", o.jitter_mean, "jitter mean (us)");
        c->add_option("--jitter-sigma", o.jitter_sigma, "jitter standard deviation (us)")->check(CLI::NonNegativeNumber);
    };
    auto add_fit = [&](CLI::App* c) {
        c->add_option("--l-max", o.l_max, "largest GoP length considered")->check(CLI::Range(2, 1024));
        c->add_option("--kmeans-k", o.kmeans_k, "cluster count (3 or 4)")->check(CLI::Range(3, 4));
        c->add_option("--threshold", o.threshold, "fixed change-score threshold");
        auto* h = c->add_flag("--hierarchical", o.hierarchical, "split non-reference b-frames");
        c->add_flag("--flat", o.flat, "disable b-frame refinement")->excludes(h);
    };
    auto add_drop = [&](CLI::App* c) {
        c->add_option("--fraction", o.fractions, "drop fraction(s)")->check(CLI::Range(0.0, 1.0));
        c->add_option("--window-ms", o.window_ms, "drop accounting window (ms)")->check(CLI::PositiveNumber);
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic trace");
    add_profile(synth);
    add_mode(synth);
    synth->add_option("--gops", o.gops, "GoPs to generate")->check(CLI::PositiveNumber);
    synth->add_option("--noise-cv", o.noise_cv, "frame size noise")->check(CLI::NonNegativeNumber);
    add_seed(synth);
    add_out(synth);

    auto* jitter = app.add_subcommand("jitter", "add Gaussian delay jitter to a trace");
    add_in(jitter);
    add_jitter(jitter);
    add_seed(jitter);
    add_out(jitter);

    auto* smooth = app.add_subcommand("smooth", "spread each frame's packets evenly");
    add_in(smooth);
    add_profile(smooth);
    smooth->add_option("--span-us", o.span_us, "smoothing span (us)")->check(CLI::PositiveNumber);
    add_out(smooth);

    auto* fitc = app.add_subcommand("fit", "calibrate a classifier on a trace");
    add_in(fitc);
    add_profile(fitc);
    add_mode(fitc);
    add_fit(fitc);
    add_seed(fitc);
    fitc->add_option("--calibration-packets", o.calibration_packets, "calibrate on this many leading packets");
    add_out(fitc);

    auto* label = app.add_subcommand("label", "label a trace with a fitted model");
    add_in(label);
    label->add_option("--model", o.model, "model JSON from 'fit'")->required();
    add_out(label);

    auto* gop = app.add_subcommand("gop", "detect slice structure and GoP length");
    add_in(gop);
    add_profile(gop);
    add_mode(gop);
    add_fit(gop);
    add_seed(gop);
    add_out(gop);

    auto* drop = app.add_subcommand("drop", "plan and apply selective discard");
    add_in(drop);
    add_drop(drop);
    drop->add_option("--policy", o.policy_name, "drop policy")->check(CLI::IsMember(kPolicyNames, CLI::ignore_case));
    add_seed(drop);
    add_out(drop);

    auto* eval = app.add_subcommand("eval", "confusion matrix of a labeled trace");
    add_in(eval);
    add_out(eval);

    auto* pipe = app.add_subcommand("pipeline", "run the full experiment and write a report bundle");
    pipe->add_option("--config", o.config, "JSON config (flags override)");
    add_profile(pipe);
    add_mode(pipe);
    pipe->add_option("--gops", o.gops, "GoPs to generate")->check(CLI::PositiveNumber);
    pipe->add_option("--calibration-gops", o.calibration_gops, "GoPs used for calibration")->check(CLI::PositiveNumber);
    pipe->add_option("--noise-cv", o.noise_cv, "frame size noise")->check(CLI::NonNegativeNumber);
    add_seed(pipe);
    add_jitter(pipe);
    pipe->add_flag("--smoothing", o.smoothing, "smooth packet emission before jitter");
    pipe->add_option("--span-us", o.span_us, "smoothing span (us)")->check(CLI::PositiveNumber);
    add_drop(pipe);
    add_fit(pipe);
    pipe->add_option("--csv-dir", o.csv_dir, "write CSV plot series here");
    pipe->add_flag("--sweep-jitter", o.sweep_jitter, "also write accuracy_vs_jitter.csv");
    add_out(pipe);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    o.mode = kModes.at(CLI::detail::to_lower(o.mode_name));
    o.policy = kPolicyNames.at(CLI::detail::to_lower(o.policy_name));

    try {
        if (*synth) return run_synth(o, synth);
        if (*jitter) return run_jitter(o);
        if (*smooth) return run_smooth(o, smooth);
        if (*fitc) return run_fit(o, fitc);
        if (*label) return run_label(o);
        if (*gop) return run_gop(o, gop);
        if (*drop) return run_drop(o);
        if (*eval) return run_eval(o);
        if (*pipe) return run_pipeline_cmd(o, pipe);
    } catch (const fs::DetectionError& e) {
        std::cerr << "framesniff: detection failed: " << e.what() << '\n';
        return kExitDetection;
    } catch (const fs::IoError& e) {
        std::cerr << "framesniff: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "framesniff: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::Error& e) {
        std::cerr << "framesniff: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
