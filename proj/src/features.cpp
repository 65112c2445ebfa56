#include "emint/features.hpp"

#include <cstring>
#include <fstream>

#include "emint/errors.hpp"

namespace emint {

void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
    if (m.data.size() != static_cast<std::size_t>(m.rows) * m.cols)
        throw ValidationError("feature matrix shape/data mismatch for " + path.string());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(&m.rows), sizeof(m.rows));
    out.write(reinterpret_cast<const char*>(&m.cols), sizeof(m.cols));
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!out) throw IoError("write failed for " + path.string());
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    FeatureMatrix m;
    in.read(reinterpret_cast<char*>(&m.rows), sizeof(m.rows));
    in.read(reinterpret_cast<char*>(&m.cols), sizeof(m.cols));
    if (!in) throw IoError("short read (header) in " + path.string());
    const std::size_t n = static_cast<std::size_t>(m.rows) * m.cols;
    m.data.resize(n);
    in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw IoError("short read (payload) in " + path.string());
    return m;
}

FeatureMatrix au_features(const AUTrace& trace, const EmotionAUMap& map) {
    const auto channels = map.all_channels();
    std::vector<int> idx;
    for (const auto& c : channels) {
        const int i = trace.channel_index(c);
        if (i < 0)
            throw ValidationError("recording '" + trace.video_id + "' is missing channel '" + c + "'");
        idx.push_back(i);
    }
    FeatureMatrix m;
    m.rows = static_cast<std::uint32_t>(trace.frame_count());
    m.cols = static_cast<std::uint32_t>(channels.size());
    m.data.reserve(static_cast<std::size_t>(m.rows) * m.cols);
    for (std::size_t f = 0; f < trace.frame_count(); ++f)
        for (const int col : idx)
            m.data.push_back(static_cast<float>(trace.values[f][static_cast<std::size_t>(col)]));
    return m;
}

} // namespace emint
