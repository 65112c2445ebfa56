// Synthetic subjects, recordings, and corpora with ground-truth
// expressivity curves.
//
// Two collection protocols are modeled. Batch 1: long pulse videos
// (neutral, raised-cosine rise to a peak at mid-video, fall back to
// neutral), one ordinary smile and one full-range smile per subject, with
// the pre-onset frames declared as the neutral span. Batch 2: short
// plateau videos at three requested intensities with a brief lead-in and
// no neutral span (recorded only while expressing).
//
// Everything is deterministic under the corpus seed; per-subject and
// per-recording streams are derived by hashing, so outputs do not depend
// on generation order. AU values and ground truth are quantized to six
// decimals at generation time, making disk round-trips bit-exact.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emint/au_trace.hpp"
#include "emint/features.hpp"
#include "emint/manifest.hpp"

namespace emint {

inline const std::vector<std::string> kAUChannels = {"AU6L", "AU6R", "AU12L", "AU12R"};

struct SubjectProfile {
    std::string subject_id;
    std::map<std::string, double> au_max;   // AU6 sides in [0.4,0.6], AU12 sides in [0.5,0.8]
    std::map<std::string, double> baseline; // resting activation, below every maxima
    int expressivity_speed = 15;            // frames from neutral to peak
    double noise_sd = 0.01;
};

struct TaskScript {
    enum class Kind { pulse, plateau };
    Kind kind = Kind::pulse;
    double peak_or_level = 1.0; // pulse peak or plateau level
    int length_frames = 270;
    double fps = 30.0;
    int lead_frames = 0; // plateau: neutral lead-in before the rise
    std::string task_tag;
};

struct PlateauLevel {
    double level = 0.5;
    double jitter = 0.0; // per-recording uniform execution error
};

struct CorpusConfig {
    int n_subjects = 41;
    std::uint64_t seed = 1;
    double fps = 30.0;
    double noise_sd = 0.01;
    double invalid_fraction = 0.02;
    double baseline_max = 0.035;
    int speed_min = 14;
    int speed_max = 22;

    // batch 1 (pulse protocol, ~9 s)
    int pulse_frames = 270;
    double smile_peak = 0.6;
    double smile_peak_jitter = 0.05;

    // batch 2 (plateau protocol, ~4 s)
    int plateau_frames = 126;
    int plateau_lead = 22;
    std::array<PlateauLevel, 3> plateau_levels{{{0.32, 0.12}, {0.67, 0.17}, {0.925, 0.075}}};

    // subject -> batch assignment
    enum class BatchPattern { alternate, batch1_first, batch2_first };
    BatchPattern batch_pattern = BatchPattern::alternate;
    int batch_split_index = 0; // for *_first patterns

    // fixed per-video lengths reproducing the published segment-count
    // arithmetic (overrides pulse/plateau lengths; sets fps 60)
    bool paper_sizing = false;

    // synthetic backbone embeddings with per-subject nuisance (written as
    // per-recording feature files referenced by the manifest)
    bool write_embeddings = false;
    double embed_mix = 0.10;
    double embed_offset_batch1_lo = 0.30, embed_offset_batch1_hi = 0.45;
    double embed_offset_batch2_lo = 0.05, embed_offset_batch2_hi = 0.20;

    int batch_of(int subject_index) const;

    static CorpusConfig defaults();
    // Zero noise/baseline/jitter/invalid frames: the labeling pipeline must
    // reproduce round(10*g) exactly on this corpus.
    static CorpusConfig exact_labeling();
    // Sized so batch-2 windows total 3552 and batch-1 windows 1998 at
    // T=16, stride=6.
    static CorpusConfig paper_counts();
    // 7 pulse subjects with out-of-population embedding offsets plus 14
    // plateau subjects: the adaptive-learning study corpus.
    static CorpusConfig adaptation_study();
};

SubjectProfile gen_subject(const CorpusConfig& config, int subject_index);

struct GeneratedRecording {
    AUTrace trace;
    std::vector<double> ground_truth; // g(t), quantized to 6 decimals
    std::optional<FeatureMatrix> embedding;
};

// Per-frame AU = baseline + g*(max - baseline) + noise, clipped to [0,1];
// about invalid_fraction of frames are masked invalid.
GeneratedRecording gen_recording(const SubjectProfile& profile, const TaskScript& script,
                                 std::uint64_t rec_seed, const CorpusConfig& config,
                                 const std::array<double, 16>* embed_mix_matrix = nullptr,
                                 const std::array<double, 4>* embed_offset = nullptr);

// Writes traces/, truth/ (frame,g per recording), optional features/, and
// manifest.json under out_dir; returns the manifest.
DatasetManifest gen_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir);

} // namespace emint
