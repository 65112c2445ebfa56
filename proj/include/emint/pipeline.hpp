// Pipeline configuration and stage orchestration shared by the CLI.
//
// Stages form a chain (gen, label, segment, augment, split, train, adapt,
// eval, report). Each stage writes its artifacts plus a stamp.json whose
// fingerprint hashes the stage's own config section and the upstream
// fingerprint; a downstream stage refuses to read artifacts whose stamp no
// longer matches the current config (stale) or is absent (stage order).
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emint/scorer.hpp"
#include "emint/synth.hpp"

namespace emint {

struct PipelineConfig {
    std::filesystem::path corpus_dir = "corpus";
    std::filesystem::path work_dir = "work";
    std::uint64_t seed = 1;

    // gen
    std::string gen_preset = "default"; // default|exact-labeling|paper-counts|adaptation-study
    int gen_subjects = 0;               // 0 = preset default

    // labeling
    std::filesystem::path emotion_map_file;   // empty = built-in happiness map
    std::vector<std::string> task_filter;     // maxima scope; empty = all recordings

    // segmentation
    int window_t = 16;
    int window_stride = 6;

    // augmentation
    int smooth_window = 5;
    double slope_threshold = 0.01;
    int dense_stride = 1;
    std::int64_t balance_target = 0; // 0 = largest populated nonzero class

    // split
    double split_fraction = 0.7;
    std::string split_mode = "subject"; // subject|batch (batch: train = batch 2)

    // scorer (defaults carry the published training recipe)
    ScorerConfig scorer;

    // adapt
    int adapt_iterations = 5;
    int adapt_videos_per_iteration = 3;
    int adapt_k = 2;

    // eval
    bool eval_include_augmented = false;

    static PipelineConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    static PipelineConfig load(const std::filesystem::path& path);

    // Dotted-path override, e.g. "scorer.learning_rate=0.05".
    static void apply_override(nlohmann::json& doc, const std::string& key_value);

    CorpusConfig corpus_config() const;
    std::uint64_t stage_seed(std::string_view stage) const;
};

namespace pipeline {

// Each runner validates upstream stamps, writes its artifacts and stamp,
// and returns a machine-readable summary.
nlohmann::json run_gen(const PipelineConfig& config);
nlohmann::json run_label(const PipelineConfig& config);
nlohmann::json run_segment(const PipelineConfig& config);
nlohmann::json run_augment(const PipelineConfig& config);
nlohmann::json run_split(const PipelineConfig& config);
nlohmann::json run_train(const PipelineConfig& config);
nlohmann::json run_adapt(const PipelineConfig& config);
nlohmann::json run_eval(const PipelineConfig& config);
nlohmann::json run_report(const PipelineConfig& config);
nlohmann::json run_grad_check(const PipelineConfig& config);

} // namespace pipeline

} // namespace emint
