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

#include "framesniff/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace framesniff {
namespace {

// Prefix sums of x and x^2. long double keeps integer-valued windows exact,
// so a constant window has exactly zero variance.
class WindowStats {
  public:
    explicit WindowStats(std::span<const double> x) : sum_(x.size() + 1), sq_(x.size() + 1) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const long double v = x[i];
            sum_[i + 1] = sum_[i] + v;
            sq_[i + 1] = sq_[i] + v * v;
        }
    }

    double mean(std::size_t begin, std::size_t n) const {
        return static_cast<double>((sum_[begin + n] - sum_[begin]) / static_cast<long double>(n));
    }

    double variance(std::size_t begin, std::size_t n) const {
        const long double s = sum_[begin + n] - sum_[begin];
        const long double q = sq_[begin + n] - sq_[begin];
        const long double ln = static_cast<long double>(n);
        const long double v = (q - s * s / ln) / ln;
        return v > 0 ? static_cast<double>(v) : 0.0;
    }

  private:
    std::vector<long double> sum_;
    std::vector<long double> sq_;
};

double pooled_score(const WindowStats& st, std::size_t begin, std::size_t n, int pairs) {
    double num = 0;
    double den = 0;
    double prev_mean = st.mean(begin, n);
    double prev_var = st.variance(begin, n);
    for (int j = 1; j <= pairs; ++j) {
        const std::size_t b = begin + static_cast<std::size_t>(j) * n;
        const double m = st.mean(b, n);
        const double v = st.variance(b, n);
        num += (prev_mean - m) * (prev_mean - m);
        den += prev_var + v;
        prev_mean = m;
        prev_var = v;
    }
    return num / (den + kVarianceEpsilon);
}

double separation(const WindowStats& st, std::size_t left, std::size_t right, std::size_t n) {
    const double d = st.mean(right, n) - st.mean(left, n);
    return d * d / (st.variance(left, n) + st.variance(right, n) + kVarianceEpsilon);
}

constexpr double kLevelChange = 0.10;

}  // namespace

std::vector<double> bit_generation_ratio(std::span<const double> sizes, std::span<const double> gaps) {
    if (sizes.size() != gaps.size()) throw DomainError("sizes and gaps differ in length");
    std::vector<double> r(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(gaps[i] > 0))
            throw DomainError("non-positive inter-arrival gap at packet " + std::to_string(i));
        r[i] = sizes[i] / gaps[i];
    }
    return r;
}

double window_pair_score(std::span<const double> sizes, std::size_t start, std::size_t n) {
    if (n == 0 || start + 2 * n > sizes.size()) throw DomainError("window pair exceeds the sequence");
    WindowStats st(sizes.subspan(start, 2 * n));
    return separation(st, 0, n, n);
}

SliceStructure detect_slice_structure(std::span<const double> sizes, const SliceDetectConfig& cfg) {
    if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) throw DomainError("invalid slice search range");
    if (cfg.required_agreements < 1 || cfg.pairs_per_round < 1) throw DomainError("invalid detector settings");
    const std::size_t need =
        2 * static_cast<std::size_t>(cfg.n_max) * static_cast<std::size_t>(cfg.required_agreements + 1);
    if (sizes.size() < need)
        throw DomainError("need at least " + std::to_string(need) + " packets, got " + std::to_string(sizes.size()));

    const WindowStats st(sizes);
    const std::size_t len = sizes.size();
    const std::size_t windows = static_cast<std::size_t>(cfg.pairs_per_round) + 1;

    std::size_t start = 0;
    int last = -1;
    int streak = 0;
    int rounds = 0;
    while (true) {
        double best = -1;
        int best_n = 0;
        std::size_t best_phase = 0;
        for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
            const auto un = static_cast<std::size_t>(n);
            if (start + un - 1 + windows * un > len) continue;
            for (std::size_t phase = 0; phase < un; ++phase) {
                const double s = pooled_score(st, start + phase, un, cfg.pairs_per_round);
                if (s > best || (s == best && n > best_n)) {
                    best = s;
                    best_n = n;
                    best_phase = phase;
                }
            }
        }
        if (best_n == 0) break;
        ++rounds;
        streak = best_n == last ? streak + 1 : 1;
        last = best_n;
        if (streak >= cfg.required_agreements) {
            const auto un = static_cast<std::size_t>(best_n);
            return {best_n, (start + best_phase) % un, rounds};
        }
        start += static_cast<std::size_t>(best_n);
    }
    throw DetectionError("slice count did not stabilize over " + std::to_string(rounds) + " rounds");
}

int detect_slices_per_frame(std::span<const double> sizes, int n_min, int n_max) {
    SliceDetectConfig cfg;
    cfg.n_min = n_min;
    cfg.n_max = n_max;
    return detect_slice_structure(sizes, cfg).slices_per_frame;
}

std::vector<double> frame_sizes(std::span<const double> sizes, int n) {
    if (n < 1) throw DomainError("slices per frame must be positive");
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> out;
    for (std::size_t i = 0; i + un <= sizes.size(); i += un) {
        double s = 0;
        for (std::size_t k = 0; k < un; ++k) s += sizes[i + k];
        out.push_back(s);
    }
    return out;
}

std::vector<double> change_scores(std::span<const double> sizes, std::span<const double> ratios, int half_window) {
    if (sizes.size() != ratios.size()) throw DomainError("sizes and ratios differ in length");
    if (half_window < 1) throw DomainError("half window must be positive");
    const auto L = static_cast<std::size_t>(half_window);
    const std::size_t n = ratios.size();
    if (n <= 2 * L) throw DomainError("sequence shorter than one full window");

    double m = 0;
    for (double s : sizes) m += s;
    m /= static_cast<double>(n);

    const WindowStats st(ratios);
    std::vector<double> c(n, 0.0);
    for (std::size_t i = L; i + L < n; ++i) {
        const double lambda = sizes[i] != m ? m - sizes[i] : 1.0;
        c[i] = lambda * lambda * separation(st, i - L, i + 1, L);
    }
    return c;
}

double adaptive_threshold(std::span<const double> scores, int half_window, double scale) {
    const auto L = static_cast<std::size_t>(half_window);
    if (scores.size() <= 2 * L) return 0.0;
    std::vector<double> v(scores.begin() + static_cast<std::ptrdiff_t>(L),
                          scores.end() - static_cast<std::ptrdiff_t>(L));
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return scale * *mid;
}

BoundarySet detect_boundaries(std::span<const double> sizes, std::span<const double> ratios, int half_window,
                              double threshold) {
    const auto c = change_scores(sizes, ratios, half_window);
    const auto L = static_cast<std::size_t>(half_window);
    const std::size_t n = ratios.size();
    const WindowStats st(ratios);

    const std::size_t bridge = std::max<std::size_t>(1, L / 2);
    BoundarySet out;
    out.threshold = threshold;
    std::size_t i = L;
    while (i + L < n) {
        if (!(c[i] > threshold)) {
            ++i;
            continue;
        }
        // A run continues across short dips: a packet whose size is close to
        // the mean has a tiny lambda and can break a single change in two.
        std::size_t last = i;
        for (std::size_t k = i + 1; k + L < n && k <= last + bridge; ++k)
            if (c[k] > threshold) last = k;

        // Split e separates [e-L+1, e] from [e+1, e+L].
        const std::size_t lo = std::max(i - 1, L - 1);
        const std::size_t hi = std::min(last, n - 1 - L);
        std::size_t best_e = i;
        double best = -1;
        for (std::size_t e = lo; e <= hi; ++e) {
            const double s = separation(st, e + 1 - L, e + 1, L);
            if (s > best) {
                best = s;
                best_e = e;
            }
        }
        if (out.boundaries.empty() || best_e > out.boundaries.back()) out.boundaries.push_back(best_e);
        i = last + 1;
    }

    std::size_t begin = 0;
    for (std::size_t e : out.boundaries) {
        out.frame_features.push_back(st.mean(begin, e + 1 - begin));
        begin = e + 1;
    }
    if (begin < n) out.trailing_feature = st.mean(begin, n - begin);
    return out;
}

double estimate_frame_period(std::span<const double> durations) {
    double period = 0;
    std::size_t best_support = 0;
    for (double d : durations) {
        if (!(d > 0)) continue;
        std::size_t support = 0;
        for (double e : durations) support += std::abs(e - d) <= 0.1 * d;
        if (support > best_support || (support == best_support && d > period)) {
            best_support = support;
            period = d;
        }
    }
    if (!(period > 0)) throw DomainError("segments have no duration");
    for (int pass = 0; pass < 3; ++pass) {
        double total = 0;
        double slots = 0;
        for (double d : durations) {
            const double k = std::round(d / period);
            if (k >= 1 && std::abs(d / period - k) <= 0.15) {
                total += d;
                slots += k;
            }
        }
        if (slots > 0) period = total / slots;
    }
    return period;
}

BoundarySet align_to_frame_slots(const BoundarySet& segments, std::span<const double> sizes,
                                 std::span<const double> ratios, std::optional<double> period_us) {
    if (sizes.size() != ratios.size()) throw DomainError("sizes and ratios differ in length");
    const std::size_t n = ratios.size();
    std::vector<double> gap(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(ratios[i] > 0)) throw DomainError("ratios must be positive");
        gap[i] = sizes[i] / ratios[i];
    }
    std::vector<double> elapsed(n + 1, 0.0);  // elapsed[i]: time before packet i
    for (std::size_t i = 0; i < n; ++i) elapsed[i + 1] = elapsed[i] + gap[i];
    const WindowStats st(ratios);

    std::vector<std::pair<std::size_t, std::size_t>> segs;
    std::size_t begin = 0;
    for (std::size_t e : segments.boundaries) {
        if (e >= n) throw DomainError("boundary beyond the sequence");
        segs.emplace_back(begin, e + 1);
        begin = e + 1;
    }
    BoundarySet out;
    out.threshold = segments.threshold;
    if (segs.empty()) {
        out.trailing_feature = segments.trailing_feature;
        return out;
    }
    auto dur = [&](const std::pair<std::size_t, std::size_t>& s) { return elapsed[s.second] - elapsed[s.first]; };
    auto feat = [&](const std::pair<std::size_t, std::size_t>& s) { return st.mean(s.first, s.second - s.first); };

    // Inside a run at one ratio level the change score carries no frame
    // information, so only real level changes are kept; the run is then split
    // on the slot grid below.
    {
        std::vector<std::pair<std::size_t, std::size_t>> kept{segs.front()};
        for (std::size_t k = 1; k < segs.size(); ++k) {
            auto& cur = kept.back();
            const double fa = feat(cur);
            const double fb = feat(segs[k]);
            if (std::abs(fa - fb) > kLevelChange * std::max(fa, fb))
                kept.push_back(segs[k]);
            else
                cur.second = segs[k].second;
        }
        segs = std::move(kept);
    }

    double period = 0;
    if (period_us) {
        period = *period_us;
    } else {
        std::vector<double> d;
        for (const auto& sg : segs) d.push_back(dur(sg));
        period = estimate_frame_period(d);
    }
    if (!(period > 0)) throw DomainError("frame period must be positive");
    out.frame_period_us = period;

    // Fold fragments, shortest first.
    while (segs.size() > 1) {
        std::size_t k = 0;
        for (std::size_t j = 1; j < segs.size(); ++j)
            if (dur(segs[j]) < dur(segs[k])) k = j;
        if (dur(segs[k]) >= 0.5 * period) break;
        const double fk = feat(segs[k]);
        std::size_t into;
        if (k == 0)
            into = 1;
        else if (k + 1 == segs.size())
            into = k - 1;
        else
            into = std::abs(feat(segs[k - 1]) - fk) <= std::abs(feat(segs[k + 1]) - fk) ? k - 1 : k + 1;
        const std::size_t lo = std::min(k, into);
        segs[lo] = {segs[lo].first, segs[lo + 1].second};
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(lo + 1));
    }

    for (const auto& sg : segs) {
        const double d = dur(sg);
        const auto slots = static_cast<std::size_t>(std::max(1.0, std::round(d / period)));
        std::size_t start = sg.first;
        for (std::size_t j = 1; j < slots && start + 1 < sg.second; ++j) {
            const double mark = elapsed[sg.first] + d * static_cast<double>(j) / static_cast<double>(slots);
            // Last packet of the slot: the one whose arrival is closest to the mark.
            std::size_t best = start;
            for (std::size_t i = start; i + 1 < sg.second; ++i)
                if (std::abs(elapsed[i + 1] - mark) < std::abs(elapsed[best + 1] - mark)) best = i;
            out.boundaries.push_back(best);
            out.frame_features.push_back(st.mean(start, best + 1 - start));
            start = best + 1;
        }
        out.boundaries.push_back(sg.second - 1);
        out.frame_features.push_back(st.mean(start, sg.second - start));
    }
    // The tail has no closing change point: cut whole slots off it and leave
    // the final, possibly incomplete, slot as the trailing frame.
    std::size_t start = segs.back().second;
    if (start < n) {
        const double t0 = elapsed[start];
        const double span = elapsed[n] - t0;
        for (int j = 1; j * period <= span - 0.5 * period && start + 1 < n; ++j) {
            const double mark = t0 + j * period;
            std::size_t best = start;
            for (std::size_t i = start; i + 1 < n; ++i)
                if (std::abs(elapsed[i + 1] - mark) < std::abs(elapsed[best + 1] - mark)) best = i;
            out.boundaries.push_back(best);
            out.frame_features.push_back(st.mean(start, best + 1 - start));
            start = best + 1;
        }
        if (start < n) out.trailing_feature = st.mean(start, n - start);
    }
    return out;
}

double gop_window_cost(std::span<const double> s, int l) {
    if (l < 2) throw DomainError("window length must be at least 2");
    const auto ul = static_cast<std::size_t>(l);
    double g = 0;
    for (std::size_t i = 0; i + ul < s.size(); ++i) g += std::abs(s[i] - s[i + ul - 1]);
    return g;
}

int detect_gop_size(std::span<const double> s, int l_max) {
    if (l_max < 2) throw DomainError("l_max must be at least 2");
    if (s.size() < 2 * static_cast<std::size_t>(l_max))
        throw DomainError("GoP detection needs at least 2*l_max = " + std::to_string(2 * l_max) + " frames, got " +
                          std::to_string(s.size()));
    std::vector<double> per_term(static_cast<std::size_t>(l_max) + 1, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (int l = 2; l <= l_max; ++l) {
        const double terms = static_cast<double>(s.size()) - l;
        per_term[static_cast<std::size_t>(l)] = gop_window_cost(s, l) / terms;
        best = std::min(best, per_term[static_cast<std::size_t>(l)]);
    }
    const double cutoff = best * 1.2 + 1e-12;
    for (int l = 2; l <= l_max; ++l)
        if (per_term[static_cast<std::size_t>(l)] <= cutoff) return l - 1;
    return l_max - 1;
}

}  // namespace framesniff
