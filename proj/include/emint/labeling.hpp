// Normalized emotion intensity from AU activations.
//
// A subject's per-channel maxima define their personal expressive range;
// each frame's intensity is the mean over term groups of
// sum(AU)/sum(maxima), clamped to [0,1], quantized to classes 0..10 by
// rounding to the nearest tenth. Bilateral channel pairs form one term
// group and share a denominator.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emint/au_trace.hpp"

namespace emint {

struct EmotionAUMap {
    std::string emotion;
    std::vector<std::vector<std::string>> terms; // groups of channel names

    // AU6 + AU12, both bilateral.
    static EmotionAUMap happiness();

    std::vector<std::string> all_channels() const;
    void validate() const; // non-empty groups, no channel in two groups
};

EmotionAUMap parse_emotion_map(std::string_view json_text);
std::string serialize_emotion_map(const EmotionAUMap& map);

struct AUMaxima {
    std::string subject_id;
    std::map<std::string, double> channel_max;
};

// Channels whose observed maximum falls below this are degenerate: the
// normalization would divide by (almost) nothing and fabricate labels.
inline constexpr double kDegenerateMaxEpsilon = 1e-3;

// Per-channel max over valid frames across all given recordings of one subject.
AUMaxima subject_au_maxima(std::span<const AUTrace> traces, const EmotionAUMap& map);

struct IntensityTrace {
    std::string subject_id;
    std::string video_id;
    std::vector<double> intensity;    // clamped to [0,1]
    std::vector<int> label;           // 0..10, quantized intensity
    std::vector<std::uint8_t> valid;  // propagated from the AU trace

    std::size_t frame_count() const { return intensity.size(); }
};

IntensityTrace normalize_emotion_intensity(const AUTrace& trace, const AUMaxima& maxima,
                                           const EmotionAUMap& map);

// Round-half-away-from-zero of 10*clamp(x,0,1). Throws on NaN.
int quantize_intensity(double x);

// CSV: header "frame,valid,intensity,label", intensity at 6 decimals.
std::string serialize_intensity_trace(const IntensityTrace& trace);
IntensityTrace parse_intensity_trace(std::string_view text);

} // namespace emint
