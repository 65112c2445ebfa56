// Dataset manifest: subjects, recordings, file locations, task tags.
//
// JSON schema:
//   { "subjects": [ { "subject_id": str, "recordings": [ {
//       "video_id": str, "trace_path": str, "features_path": str|null,
//       "task_tag": str, "neutral_span": [start,end]|null, "batch": 1|2 } ] } ] }
//
// neutral_span is end-exclusive. Relative paths resolve against the
// manifest's directory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emint {

struct FrameSpan {
    std::int64_t begin = 0;
    std::int64_t end = 0; // exclusive
};

struct RecordingEntry {
    std::string video_id;
    std::filesystem::path trace_path; // resolved to absolute on load
    std::optional<std::filesystem::path> features_path;
    std::string task_tag;
    std::optional<FrameSpan> neutral_span;
    int batch = 1;
};

struct SubjectEntry {
    std::string subject_id;
    std::vector<RecordingEntry> recordings;
};

struct DatasetManifest {
    std::vector<SubjectEntry> subjects;
    std::filesystem::path base_dir;

    const SubjectEntry* find_subject(std::string_view subject_id) const;
    const RecordingEntry* find_recording(std::string_view subject_id, std::string_view video_id) const;
    std::size_t recording_count() const;
};

// Parse and validate; when check_paths is set, every trace_path (and
// features_path) must exist on disk.
DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                               bool check_paths = true);

DatasetManifest load_manifest(const std::filesystem::path& path);

// Paths are written relative to base_dir where possible.
std::string serialize_manifest(const DatasetManifest& manifest);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

} // namespace emint
