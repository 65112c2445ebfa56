// Accuracy metrics, label-difference histograms, per-task intensity stats.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emint/labeling.hpp"
#include "emint/manifest.hpp"

namespace emint {

struct EvalReport {
    std::int64_t n = 0;
    double exact = 0.0;
    std::array<double, 11> within{};          // within-k accuracy for k = 0..10
    std::array<std::int64_t, 11> histogram{}; // |pred - label| counts
    std::array<std::array<std::int64_t, 11>, 11> confusion{}; // [label][pred]

    std::string to_json() const;
    std::string to_csv() const;
};

EvalReport evaluate(std::span<const int> predictions, std::span<const int> labels);

struct TaskStats {
    std::string task;
    std::vector<double> per_subject_max; // one per subject, manifest order
    double mean = 0.0;
    double sd = 0.0;
};

struct TaskIntensityReport {
    std::vector<TaskStats> groups; // sorted by task tag
    // Present only when there are exactly two tasks: |mean_a - mean_b|.
    std::optional<double> mean_difference;

    std::string to_json() const;
};

// Per-subject max intensity grouped by task tag, over valid frames.
TaskIntensityReport max_intensity_by_task(const DatasetManifest& manifest,
                                          const std::map<std::string, IntensityTrace>& traces);

} // namespace emint
