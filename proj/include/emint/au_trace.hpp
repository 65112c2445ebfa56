// Per-frame action-unit traces and their CSV form.
//
// CSV layout: header "frame,valid,<channel names...>", one row per frame,
// values serialized at 6 decimal places. The `valid` column is optional
// (absent means every frame is valid). Frame indices must be strictly
// increasing; skipped indices become masked placeholder rows so that frame
// numbering stays aligned with the source video.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emint {

struct AUTrace {
    std::string subject_id;
    std::string video_id;
    double fps = 30.0; // carried as metadata only, never assumed by the pipeline
    std::vector<std::string> channels;
    std::vector<std::vector<double>> values; // frame-major, values in [0,1]
    std::vector<std::uint8_t> valid;         // face-detected mask, one per frame

    std::size_t frame_count() const { return values.size(); }

    // Index of a channel by name, or -1.
    int channel_index(std::string_view name) const;
};

// Throws ParseError with row/column position on malformed input.
AUTrace parse_au_trace(std::string_view text);

std::string serialize_au_trace(const AUTrace& trace);

AUTrace load_au_trace(const std::filesystem::path& path);
void save_au_trace(const AUTrace& trace, const std::filesystem::path& path);

// Whole-file helpers shared across modules.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace emint
