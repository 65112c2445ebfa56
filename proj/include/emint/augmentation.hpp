// Transitional-state detection and class-balancing over-sampling.
//
// A transition span is a maximal run of frames whose centered-moving-average
// intensity slope stays at or above the threshold with constant sign.
// Augmentation tiles additional windows at a denser stride and keeps those
// whose last frame lies inside a span, adding them to classes below the
// target count. Base windows are never removed or relabeled.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emint/features.hpp"
#include "emint/labeling.hpp"
#include "emint/segmentation.hpp"

namespace emint {

struct TransitionSpan {
    std::string video_id;
    std::int64_t begin = 0;
    std::int64_t end = 0; // exclusive
    enum class Direction { rising, falling } direction = Direction::rising;
    double mean_abs_slope = 0.0; // per frame
};

std::vector<TransitionSpan> detect_transitions(const IntensityTrace& trace, int smooth_window,
                                               double slope_threshold);

struct BalanceReport {
    std::array<std::int64_t, 11> before{};
    std::array<std::int64_t, 11> after{};
    std::int64_t augmented = 0;
    // max/min count over the nonzero classes (1..10) that are populated;
    // *_all additionally includes class 0.
    double ratio_before = 0.0;
    double ratio_after = 0.0;
    double ratio_before_all = 0.0;
    double ratio_after_all = 0.0;
    std::int64_t target = 0;
    std::vector<int> shortfall_classes; // could not reach target

    std::string to_json() const;
    std::string histogram_csv() const;
};

struct AugmentResult {
    SegmentDataset dataset;
    BalanceReport report;
};

// target <= 0 selects the default target: the largest populated nonzero
// class count. dense_stride must be smaller than the dataset's base stride.
AugmentResult augment_transitional(const SegmentDataset& dataset,
                                   const std::map<std::string, std::vector<TransitionSpan>>& transitions,
                                   const std::map<std::string, IntensityTrace>& traces,
                                   const std::map<std::string, FeatureMatrix>& features,
                                   std::int64_t target = 0, int dense_stride = 1);

} // namespace emint
