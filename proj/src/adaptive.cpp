#include "emint/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "emint/errors.hpp"
#include "emint/evaluation.hpp"
#include "emint/rng.hpp"

namespace emint {

NeutralActive split_neutral_active(const RecordingEntry& recording,
                                   const SegmentDataset& recording_windows) {
    if (!recording.neutral_span)
        throw ValidationError("recording '" + recording.video_id + "' has no neutral_span annotation");
    const auto span = *recording.neutral_span;
    const int t = recording_windows.params.t;

    NeutralActive out;
    out.neutral.params = out.active.params = recording_windows.params;
    out.neutral.d = out.active.d = recording_windows.d;

    for (std::size_t i = 0; i < recording_windows.size(); ++i) {
        const auto& w = recording_windows.windows[i];
        if (w.video_id != recording.video_id)
            throw ValidationError("split_neutral_active: window from foreign recording '" +
                                  w.video_id + "'");
        const std::int64_t begin = w.start;
        const std::int64_t end = w.start + t; // exclusive
        if (begin >= span.begin && end <= span.end) {
            WindowSpec neutral = w;
            neutral.label = 0; // a held neutral face scores zero expressivity
            out.neutral.windows.push_back(std::move(neutral));
            out.neutral.features.push_back(recording_windows.features[i]);
        } else if (begin < span.end && end > span.end) {
            continue; // straddles the span boundary: ambiguous supervision, discarded
        } else {
            out.active.windows.push_back(w);
            out.active.features.push_back(recording_windows.features[i]);
        }
    }
    if (out.neutral.empty())
        throw ValidationError("recording '" + recording.video_id +
                              "' has an empty neutral set (span shorter than a window?)");
    return out;
}

void AdaptPlan::validate() const {
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (const auto& w : neutral.windows) {
        if (w.label != 0) throw ValidationError("adapt plan: neutral window with nonzero label");
        seen.insert({w.video_id, w.start});
    }
    for (const auto& w : active.windows) {
        if (seen.count({w.video_id, w.start}))
            throw ValidationError("adapt plan: window (" + w.video_id + ", " +
                                  std::to_string(w.start) + ") in both neutral and active sets");
    }
    if (config.iterations < 0) throw ValidationError("adapt plan: iterations must be >= 0");
    if (config.videos_per_iteration < 1)
        throw ValidationError("adapt plan: videos_per_iteration must be >= 1");
    if (config.k < 0 || config.k > 10) throw ValidationError("adapt plan: k must be in [0,10]");
}

AdaptPlan build_adapt_plan(const SubjectEntry& subject, const SegmentDataset& dataset,
                           const AdaptConfig& config) {
    AdaptPlan plan;
    plan.subject_id = subject.subject_id;
    plan.config = config;
    plan.config.finetune.epochs = 1;
    plan.neutral.params = plan.active.params = dataset.params;
    plan.neutral.d = plan.active.d = dataset.d;

    const int t = dataset.params.t;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& w = dataset.windows[i];
        if (w.subject_id != subject.subject_id || w.augmented) continue;
        const RecordingEntry* rec = nullptr;
        for (const auto& r : subject.recordings)
            if (r.video_id == w.video_id) { rec = &r; break; }
        if (!rec)
            throw ValidationError("build_adapt_plan: window references unknown recording '" +
                                  w.video_id + "'");
        if (rec->neutral_span) {
            const auto span = *rec->neutral_span;
            const std::int64_t end = w.start + t;
            if (w.start >= span.begin && end <= span.end) {
                WindowSpec neutral = w;
                neutral.label = 0;
                plan.neutral.windows.push_back(std::move(neutral));
                plan.neutral.features.push_back(dataset.features[i]);
                continue;
            }
            if (w.start < span.end && end > span.end) continue; // straddling: dropped
        }
        plan.active.windows.push_back(w);
        plan.active.features.push_back(dataset.features[i]);
    }
    if (plan.neutral.empty())
        throw ValidationError("subject '" + subject.subject_id + "' has no neutral windows to adapt on");
    plan.validate();
    return plan;
}

namespace {

double within_k_accuracy(const ScorerModel& model, const SegmentDataset& data, int k) {
    const auto preds = model.predict(data);
    std::int64_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (std::abs(preds[i] - data.windows[i].label) <= k) ++hit;
    return static_cast<double>(hit) / static_cast<double>(preds.size());
}

} // namespace

AdaptOutcome adapt(const ScorerModel& model, const AdaptPlan& plan) {
    plan.validate();
    if (plan.active.empty())
        throw ValidationError("adapt: subject '" + plan.subject_id + "' has no active windows");

    AdaptOutcome out{model, {}, false};
    out.curve.k = plan.config.k;
    out.curve.within_k.push_back(within_k_accuracy(out.model, plan.active, plan.config.k));

    // Distinct neutral-bearing videos, stable order.
    std::vector<std::string> videos;
    for (const auto& w : plan.neutral.windows)
        if (std::find(videos.begin(), videos.end(), w.video_id) == videos.end())
            videos.push_back(w.video_id);
    std::sort(videos.begin(), videos.end());

    Rng rng(derive_seed(plan.config.seed, "adapt"));
    const int vpi = plan.config.videos_per_iteration;

    for (int iter = 0; iter < plan.config.iterations; ++iter) {
        std::vector<std::string> chosen;
        if (static_cast<int>(videos.size()) >= vpi) {
            auto order = rng.permutation(videos.size());
            for (int i = 0; i < vpi; ++i) chosen.push_back(videos[order[static_cast<std::size_t>(i)]]);
        } else {
            out.sampled_with_replacement = true;
            for (int i = 0; i < vpi; ++i)
                chosen.push_back(videos[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(videos.size()) - 1))]);
        }

        SegmentDataset sample;
        sample.params = plan.neutral.params;
        sample.d = plan.neutral.d;
        for (const auto& vid : chosen) {
            for (std::size_t i = 0; i < plan.neutral.size(); ++i) {
                if (plan.neutral.windows[i].video_id != vid) continue;
                sample.windows.push_back(plan.neutral.windows[i]);
                sample.features.push_back(plan.neutral.features[i]);
            }
        }

        ScorerConfig ft = plan.config.finetune;
        ft.epochs = 1; // one optimizer epoch per iteration, recipe restarted
        ft.seed = derive_seed(plan.config.seed, "finetune", static_cast<std::uint64_t>(iter));
        train(out.model, sample, ft);
        out.curve.within_k.push_back(within_k_accuracy(out.model, plan.active, plan.config.k));
    }
    return out;
}

ImprovementReport adapt_compare(const ScorerModel& base, const ScorerModel& adapted,
                                const SegmentDataset& active) {
    if (base.t() != adapted.t() || base.d() != adapted.d())
        throw ValidationError("adapt_compare: model dimensions differ");
    if (active.empty()) throw ValidationError("adapt_compare: empty active set");

    ImprovementReport report;
    report.n = static_cast<std::int64_t>(active.size());
    const auto preds_base = base.predict(active);
    const auto preds_adapted = adapted.predict(active);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const int label = active.windows[i].label;
        report.hist_base[static_cast<std::size_t>(std::abs(preds_base[i] - label))]++;
        report.hist_adapted[static_cast<std::size_t>(std::abs(preds_adapted[i] - label))]++;
    }
    for (std::size_t b = 0; b < 11; ++b)
        report.delta[b] = report.hist_adapted[b] - report.hist_base[b];
    return report;
}

std::string ImprovementReport::to_json() const {
    nlohmann::json doc;
    doc["n"] = n;
    doc["hist_base"] = hist_base;
    doc["hist_adapted"] = hist_adapted;
    doc["delta"] = delta;
    return doc.dump(2) + "\n";
}

} // namespace emint
