// Fixed-length overlapping windows over valid-frame runs, labeled by
// their last frame, plus subject-level train/validation splitting.
//
// Windows are anchored at the start of each maximal valid run and advance
// by `stride`; a run of length L yields floor((L-T)/stride)+1 windows when
// L >= T. Windows never span invalid frames.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emint/features.hpp"
#include "emint/labeling.hpp"
#include "emint/manifest.hpp"

namespace emint {

struct SegmentParams {
    int t = 16;      // window length in frames
    int stride = 6;  // start-to-start distance
};

struct WindowSpec {
    std::string subject_id;
    std::string video_id;
    std::int64_t start = 0;
    int label = 0;
    bool augmented = false;
};

struct SegmentDataset {
    std::vector<WindowSpec> windows;
    std::vector<std::vector<float>> features; // one t*d row-major block per window
    SegmentParams params;
    int d = 0;

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }
    std::vector<std::string> distinct_subjects() const; // sorted
    std::array<std::int64_t, 11> class_counts() const;
};

// Window start offsets for one validity mask.
std::vector<std::int64_t> segment_windows(std::span<const std::uint8_t> valid, int t, int stride);

// Windows per contiguous run of the given length (the arithmetic shortcut).
std::int64_t windows_in_run(std::int64_t run_length, int t, int stride);

// Assemble the dataset: every manifest recording must have an intensity
// trace and a per-recording feature matrix (keyed by video_id) whose row
// count equals the trace frame count.
SegmentDataset build_dataset(const DatasetManifest& manifest,
                             const std::map<std::string, IntensityTrace>& traces,
                             const std::map<std::string, FeatureMatrix>& features,
                             SegmentParams params = {});

struct SubjectSplit {
    SegmentDataset train;
    SegmentDataset val;
    std::vector<std::string> train_subjects;
    std::vector<std::string> val_subjects;
};

// Partition subjects (not windows): |train subjects| = round(fraction*n),
// clamped to [1, n-1]; deterministic under seed.
SubjectSplit split_by_subject(const SegmentDataset& dataset, double train_fraction, std::uint64_t seed);

// Keep only windows whose subject appears in `subjects`.
SegmentDataset filter_by_subjects(const SegmentDataset& dataset, std::span<const std::string> subjects);

// Directory layout: windows.csv (subject,video,start,label,augmented) plus
// features/NNNNNN.bin per window, in row order.
void write_dataset(const SegmentDataset& dataset, const std::filesystem::path& dir);
SegmentDataset load_dataset(const std::filesystem::path& dir);

} // namespace emint
