#include "emint/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "emint/errors.hpp"

namespace emint {

std::vector<TransitionSpan> detect_transitions(const IntensityTrace& trace, int smooth_window,
                                               double slope_threshold) {
    if (smooth_window < 1 || smooth_window % 2 == 0)
        throw ValidationError("detect_transitions: smooth_window must be odd and >= 1");
    if (!(slope_threshold > 0.0))
        throw ValidationError("detect_transitions: slope_threshold must be > 0");

    std::vector<TransitionSpan> spans;
    const std::int64_t n = static_cast<std::int64_t>(trace.frame_count());
    const std::int64_t half = smooth_window / 2;
    std::int64_t i = 0;
    while (i < n) {
        if (!trace.valid[static_cast<std::size_t>(i)]) {
            ++i;
            continue;
        }
        std::int64_t j = i;
        while (j < n && trace.valid[static_cast<std::size_t>(j)]) ++j;
        const std::int64_t len = j - i;

        // Centered moving average, window clipped at run edges.
        std::vector<double> smooth(static_cast<std::size_t>(len));
        for (std::int64_t k = 0; k < len; ++k) {
            const std::int64_t lo = std::max<std::int64_t>(0, k - half);
            const std::int64_t hi = std::min(len - 1, k + half);
            double acc = 0.0;
            for (std::int64_t m = lo; m <= hi; ++m)
                acc += trace.intensity[static_cast<std::size_t>(i + m)];
            smooth[static_cast<std::size_t>(k)] = acc / static_cast<double>(hi - lo + 1);
        }

        // Central-difference slope, one-sided at run edges.
        std::vector<double> slope(static_cast<std::size_t>(len), 0.0);
        for (std::int64_t k = 0; k < len; ++k) {
            const std::int64_t lo = std::max<std::int64_t>(0, k - 1);
            const std::int64_t hi = std::min(len - 1, k + 1);
            if (hi > lo)
                slope[static_cast<std::size_t>(k)] =
                    (smooth[static_cast<std::size_t>(hi)] - smooth[static_cast<std::size_t>(lo)]) /
                    static_cast<double>(hi - lo);
        }

        std::int64_t k = 0;
        while (k < len) {
            if (std::abs(slope[static_cast<std::size_t>(k)]) < slope_threshold) {
                ++k;
                continue;
            }
            const bool rising = slope[static_cast<std::size_t>(k)] > 0.0;
            std::int64_t e = k;
            double acc = 0.0;
            while (e < len && std::abs(slope[static_cast<std::size_t>(e)]) >= slope_threshold &&
                   (slope[static_cast<std::size_t>(e)] > 0.0) == rising) {
                acc += std::abs(slope[static_cast<std::size_t>(e)]);
                ++e;
            }
            TransitionSpan span;
            span.video_id = trace.video_id;
            span.begin = i + k;
            span.end = i + e;
            span.direction = rising ? TransitionSpan::Direction::rising
                                    : TransitionSpan::Direction::falling;
            span.mean_abs_slope = acc / static_cast<double>(e - k);
            spans.push_back(span);
            k = e;
        }
        i = j;
    }
    return spans;
}

namespace {

double count_ratio(const std::array<std::int64_t, 11>& counts, bool include_zero) {
    std::int64_t mx = 0;
    std::int64_t mn = 0;
    bool any = false;
    for (std::size_t c = include_zero ? 0 : 1; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        if (!any) {
            mx = mn = counts[c];
            any = true;
        } else {
            mx = std::max(mx, counts[c]);
            mn = std::min(mn, counts[c]);
        }
    }
    if (!any || mn == 0) return 0.0;
    return static_cast<double>(mx) / static_cast<double>(mn);
}

} // namespace

AugmentResult augment_transitional(const SegmentDataset& dataset,
                                   const std::map<std::string, std::vector<TransitionSpan>>& transitions,
                                   const std::map<std::string, IntensityTrace>& traces,
                                   const std::map<std::string, FeatureMatrix>& features,
                                   std::int64_t target, int dense_stride) {
    if (dense_stride < 1 || dense_stride >= dataset.params.stride)
        throw ValidationError("augment_transitional: dense_stride must be in [1, base stride)");

    AugmentResult result;
    result.dataset = dataset;
    result.report.before = dataset.class_counts();

    if (target <= 0) {
        for (std::size_t c = 1; c < 11; ++c)
            target = std::max(target, result.report.before[c]);
    }
    result.report.target = target;

    std::set<std::pair<std::string, std::int64_t>> existing;
    std::map<std::string, const WindowSpec*> video_owner; // video_id -> subject via any base window
    for (const auto& w : dataset.windows) {
        existing.insert({w.video_id, w.start});
        video_owner.emplace(w.video_id, &w);
    }

    // Candidate windows per class, in deterministic (subject, video, start) order.
    struct Candidate {
        std::string subject_id;
        std::string video_id;
        std::int64_t start;
        int label;
    };
    std::array<std::vector<Candidate>, 11> candidates;

    std::vector<std::string> video_ids;
    for (const auto& [vid, spans] : transitions) video_ids.push_back(vid);
    std::sort(video_ids.begin(), video_ids.end(), [&](const std::string& a, const std::string& b) {
        const auto* wa = video_owner.count(a) ? video_owner.at(a) : nullptr;
        const auto* wb = video_owner.count(b) ? video_owner.at(b) : nullptr;
        const std::string& sa = wa ? wa->subject_id : a;
        const std::string& sb = wb ? wb->subject_id : b;
        return std::tie(sa, a) < std::tie(sb, b);
    });

    const int t = dataset.params.t;
    for (const auto& vid : video_ids) {
        const auto trace_it = traces.find(vid);
        if (trace_it == traces.end()) continue; // video contributes no windows
        const IntensityTrace& trace = trace_it->second;
        const auto& spans = transitions.at(vid);
        if (spans.empty()) continue;
        std::vector<std::uint8_t> in_span(trace.frame_count(), 0);
        for (const auto& s : spans)
            for (std::int64_t f = s.begin; f < s.end; ++f) in_span[static_cast<std::size_t>(f)] = 1;

        const std::string subject =
            video_owner.count(vid) ? video_owner.at(vid)->subject_id : trace.subject_id;
        for (const std::int64_t start : segment_windows(trace.valid, t, dense_stride)) {
            const auto last = static_cast<std::size_t>(start + t - 1);
            if (!in_span[last]) continue;
            if (existing.count({vid, start})) continue;
            const int label = trace.label[last];
            candidates[static_cast<std::size_t>(label)].push_back(
                Candidate{subject, vid, start, label});
        }
    }

    result.report.after = result.report.before;
    for (std::size_t c = 0; c < 11; ++c) {
        const std::int64_t need = target - result.report.before[c];
        if (need <= 0) continue;
        auto& pool = candidates[c];
        const auto take = std::min<std::int64_t>(need, static_cast<std::int64_t>(pool.size()));
        for (std::int64_t k = 0; k < take; ++k) {
            const auto& cand = pool[static_cast<std::size_t>(k)];
            const auto& fm = features.at(cand.video_id);
            WindowSpec w;
            w.subject_id = cand.subject_id;
            w.video_id = cand.video_id;
            w.start = cand.start;
            w.label = cand.label;
            w.augmented = true;
            std::vector<float> block(fm.data.begin() + static_cast<std::ptrdiff_t>(cand.start) * fm.cols,
                                     fm.data.begin() +
                                         static_cast<std::ptrdiff_t>(cand.start + t) * fm.cols);
            result.dataset.windows.push_back(std::move(w));
            result.dataset.features.push_back(std::move(block));
            result.report.after[c]++;
            result.report.augmented++;
        }
        if (take < need) result.report.shortfall_classes.push_back(static_cast<int>(c));
    }

    result.report.ratio_before = count_ratio(result.report.before, false);
    result.report.ratio_after = count_ratio(result.report.after, false);
    result.report.ratio_before_all = count_ratio(result.report.before, true);
    result.report.ratio_after_all = count_ratio(result.report.after, true);
    return result;
}

std::string BalanceReport::to_json() const {
    nlohmann::json doc;
    doc["before"] = before;
    doc["after"] = after;
    doc["augmented"] = augmented;
    doc["target"] = target;
    doc["ratio_before"] = ratio_before;
    doc["ratio_after"] = ratio_after;
    doc["ratio_before_all"] = ratio_before_all;
    doc["ratio_after_all"] = ratio_after_all;
    doc["shortfall_classes"] = shortfall_classes;
    return doc.dump(2) + "\n";
}

std::string BalanceReport::histogram_csv() const {
    std::string out = "class,before,after\n";
    for (std::size_t c = 0; c < 11; ++c) {
        out += std::to_string(c);
        out += ',';
        out += std::to_string(before[c]);
        out += ',';
        out += std::to_string(after[c]);
        out += '\n';
    }
    return out;
}

} // namespace emint
