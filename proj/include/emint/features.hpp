// Frame-feature matrices and their flat binary layout:
// header {rows: u32, cols: u32} then rows*cols little-endian f32, row-major.
// The same layout serves per-recording feature files (rows = frames) and
// per-window exports (rows = T).
#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "emint/au_trace.hpp"
#include "emint/labeling.hpp"

namespace emint {

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian; big-endian hosts are unsupported");

struct FeatureMatrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> data; // rows*cols, row-major

    float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

// Default desk-scale feature source: the mapped AU channels of a trace,
// in term-group order (rows = frames, cols = mapped channel count).
FeatureMatrix au_features(const AUTrace& trace, const EmotionAUMap& map);

} // namespace emint
