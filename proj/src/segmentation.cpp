#include "emint/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "emint/errors.hpp"
#include "emint/num.hpp"
#include "emint/rng.hpp"

namespace emint {

std::vector<std::string> SegmentDataset::distinct_subjects() const {
    std::set<std::string> s;
    for (const auto& w : windows) s.insert(w.subject_id);
    return {s.begin(), s.end()};
}

std::array<std::int64_t, 11> SegmentDataset::class_counts() const {
    std::array<std::int64_t, 11> counts{};
    for (const auto& w : windows) counts[static_cast<std::size_t>(w.label)]++;
    return counts;
}

std::int64_t windows_in_run(std::int64_t run_length, int t, int stride) {
    if (run_length < t) return 0;
    return (run_length - t) / stride + 1;
}

std::vector<std::int64_t> segment_windows(std::span<const std::uint8_t> valid, int t, int stride) {
    if (t < 1 || stride < 1) throw ValidationError("segment_windows: t and stride must be >= 1");
    std::vector<std::int64_t> starts;
    const std::int64_t n = static_cast<std::int64_t>(valid.size());
    std::int64_t i = 0;
    while (i < n) {
        if (!valid[static_cast<std::size_t>(i)]) {
            ++i;
            continue;
        }
        std::int64_t j = i;
        while (j < n && valid[static_cast<std::size_t>(j)]) ++j;
        const std::int64_t run_len = j - i;
        const std::int64_t count = windows_in_run(run_len, t, stride);
        for (std::int64_t k = 0; k < count; ++k) starts.push_back(i + k * stride);
        i = j;
    }
    return starts;
}

SegmentDataset build_dataset(const DatasetManifest& manifest,
                             const std::map<std::string, IntensityTrace>& traces,
                             const std::map<std::string, FeatureMatrix>& features,
                             SegmentParams params) {
    SegmentDataset ds;
    ds.params = params;

    for (const auto& subject : manifest.subjects) {
        for (const auto& rec : subject.recordings) {
            const auto trace_it = traces.find(rec.video_id);
            if (trace_it == traces.end())
                throw ValidationError("no intensity trace for recording '" + rec.video_id + "'");
            const auto feat_it = features.find(rec.video_id);
            if (feat_it == features.end())
                throw ValidationError("no feature source for recording '" + rec.video_id + "'");
            const IntensityTrace& trace = trace_it->second;
            const FeatureMatrix& fm = feat_it->second;
            if (fm.rows != trace.frame_count())
                throw ValidationError("feature/trace length mismatch for '" + rec.video_id + "': " +
                                      std::to_string(fm.rows) + " feature rows vs " +
                                      std::to_string(trace.frame_count()) + " frames");
            if (rec.neutral_span &&
                rec.neutral_span->end > static_cast<std::int64_t>(trace.frame_count()))
                throw ValidationError("neutral_span of '" + rec.video_id +
                                      "' exceeds the recording's frame range");
            if (ds.d == 0) ds.d = static_cast<int>(fm.cols);
            if (static_cast<int>(fm.cols) != ds.d)
                throw ValidationError("inconsistent feature dimension for '" + rec.video_id + "'");

            for (const std::int64_t start : segment_windows(trace.valid, params.t, params.stride)) {
                WindowSpec w;
                w.subject_id = subject.subject_id;
                w.video_id = rec.video_id;
                w.start = start;
                w.label = trace.label[static_cast<std::size_t>(start + params.t - 1)];
                w.augmented = false;
                std::vector<float> block;
                block.reserve(static_cast<std::size_t>(params.t) * fm.cols);
                const auto begin = fm.data.begin() + static_cast<std::ptrdiff_t>(start) * fm.cols;
                block.insert(block.end(), begin, begin + static_cast<std::ptrdiff_t>(params.t) * fm.cols);
                ds.windows.push_back(std::move(w));
                ds.features.push_back(std::move(block));
            }
        }
    }
    return ds;
}

SegmentDataset filter_by_subjects(const SegmentDataset& dataset, std::span<const std::string> subjects) {
    const std::set<std::string> keep(subjects.begin(), subjects.end());
    SegmentDataset out;
    out.params = dataset.params;
    out.d = dataset.d;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (keep.count(dataset.windows[i].subject_id)) {
            out.windows.push_back(dataset.windows[i]);
            out.features.push_back(dataset.features[i]);
        }
    }
    return out;
}

SubjectSplit split_by_subject(const SegmentDataset& dataset, double train_fraction, std::uint64_t seed) {
    if (dataset.empty()) throw ValidationError("split_by_subject: dataset is empty");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split_by_subject: fraction must be in (0,1)");
    auto subjects = dataset.distinct_subjects();
    if (subjects.size() < 2) throw ValidationError("split_by_subject: fewer than 2 subjects");

    Rng rng(seed);
    rng.shuffle(subjects);
    const auto n = static_cast<std::int64_t>(subjects.size());
    auto n_train = std::llround(train_fraction * static_cast<double>(n));
    n_train = std::clamp<std::int64_t>(n_train, 1, n - 1);

    SubjectSplit split;
    split.train_subjects.assign(subjects.begin(), subjects.begin() + n_train);
    split.val_subjects.assign(subjects.begin() + n_train, subjects.end());
    std::sort(split.train_subjects.begin(), split.train_subjects.end());
    std::sort(split.val_subjects.begin(), split.val_subjects.end());
    split.train = filter_by_subjects(dataset, split.train_subjects);
    split.val = filter_by_subjects(dataset, split.val_subjects);
    return split;
}

void write_dataset(const SegmentDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "features");
    write_text_file(dir / "params.json",
                    "{\"t\": " + std::to_string(dataset.params.t) +
                        ", \"stride\": " + std::to_string(dataset.params.stride) +
                        ", \"d\": " + std::to_string(dataset.d) + "}\n");
    std::string csv = "subject,video,start,label,augmented\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& w = dataset.windows[i];
        csv += w.subject_id;
        csv += ',';
        csv += w.video_id;
        csv += ',';
        csv += std::to_string(w.start);
        csv += ',';
        csv += std::to_string(w.label);
        csv += ',';
        csv += w.augmented ? "1\n" : "0\n";

        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.bin", i);
        FeatureMatrix m;
        m.rows = static_cast<std::uint32_t>(dataset.params.t);
        m.cols = static_cast<std::uint32_t>(dataset.d);
        m.data = dataset.features[i];
        write_feature_matrix(m, dir / "features" / name);
    }
    write_text_file(dir / "windows.csv", csv);
}

SegmentDataset load_dataset(const std::filesystem::path& dir) {
    SegmentDataset ds;
    {
        const auto doc = nlohmann::json::parse(read_text_file(dir / "params.json"), nullptr, false);
        if (doc.is_discarded()) throw ParseError("params.json is not valid JSON");
        ds.params.t = doc.at("t").get<int>();
        ds.params.stride = doc.at("stride").get<int>();
        ds.d = doc.at("d").get<int>();
    }
    const auto text = read_text_file(dir / "windows.csv");
    bool header_seen = false;
    for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        line = trim(line);
        if (line.empty()) return;
        if (!header_seen) {
            header_seen = true;
            return;
        }
        const auto f = split_csv(line);
        if (f.size() != 5) throw ParseError("windows.csv: expected 5 fields", lineno, 1);
        WindowSpec w;
        w.subject_id = std::string(trim(f[0]));
        w.video_id = std::string(trim(f[1]));
        const auto start = parse_int(trim(f[2]));
        const auto label = parse_int(trim(f[3]));
        const auto aug = parse_int(trim(f[4]));
        if (!start || !label || !aug) throw ParseError("windows.csv: non-numeric cell", lineno, 3);
        w.start = *start;
        w.label = static_cast<int>(*label);
        w.augmented = *aug != 0;
        ds.windows.push_back(std::move(w));
    });
    ds.features.resize(ds.windows.size());
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.bin", i);
        const auto m = read_feature_matrix(dir / "features" / name);
        if (i == 0) {
            ds.params.t = static_cast<int>(m.rows);
            ds.d = static_cast<int>(m.cols);
        }
        ds.features[i] = m.data;
    }
    return ds;
}

} // namespace emint
