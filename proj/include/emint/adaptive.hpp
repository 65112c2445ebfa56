// Per-subject adaptation: fine-tune the scorer on a new subject's
// neutral-face windows (label forced to 0) and track accuracy on their
// active-expression windows across iterations.
//
// Each iteration samples videos_per_iteration of the subject's
// neutral-bearing videos (with replacement when fewer exist, recorded in
// the outcome) and runs one optimizer epoch with the training recipe
// restarted at its initial learning rate. Active windows used for
// evaluation never include adaptation windows.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "emint/manifest.hpp"
#include "emint/scorer.hpp"
#include "emint/segmentation.hpp"

namespace emint {

struct AdaptConfig {
    int iterations = 5;
    int videos_per_iteration = 3;
    int k = 2; // within-k accuracy tracked by the curve
    ScorerConfig finetune; // epochs forced to 1 per iteration
    std::uint64_t seed = 0;
};

// Strict per-recording partition: windows fully inside the recording's
// neutral_span become neutral (label overwritten to 0), windows straddling
// the span end are discarded, everything else is active. Errors when the
// recording declares no neutral_span or no window fits inside it.
struct NeutralActive {
    SegmentDataset neutral;
    SegmentDataset active;
};
NeutralActive split_neutral_active(const RecordingEntry& recording,
                                   const SegmentDataset& recording_windows);

struct AdaptPlan {
    std::string subject_id;
    SegmentDataset neutral; // labels already forced to 0
    SegmentDataset active;
    AdaptConfig config;

    void validate() const; // disjointness by (video_id, start)
};

// Pools neutral windows across the subject's recordings that declare a
// neutral_span; recordings without one contribute all their windows as
// active. Augmented windows are excluded from plans. Errors when the
// subject has no neutral windows at all.
AdaptPlan build_adapt_plan(const SubjectEntry& subject, const SegmentDataset& dataset,
                           const AdaptConfig& config);

struct AdaptCurve {
    std::vector<double> within_k; // index 0 = baseline, length iterations+1
    int k = 2;
};

struct AdaptOutcome {
    ScorerModel model;
    AdaptCurve curve;
    bool sampled_with_replacement = false;
};

AdaptOutcome adapt(const ScorerModel& model, const AdaptPlan& plan);

struct ImprovementReport {
    std::array<std::int64_t, 11> hist_base{};
    std::array<std::int64_t, 11> hist_adapted{};
    std::array<std::int64_t, 11> delta{}; // adapted - base per bin
    std::int64_t n = 0;

    std::string to_json() const;
};

// Fig.-6-style label-difference histograms before/after adaptation.
ImprovementReport adapt_compare(const ScorerModel& base, const ScorerModel& adapted,
                                const SegmentDataset& active);

} // namespace emint
