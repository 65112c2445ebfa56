#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "emint/errors.hpp"
#include "emint/rng.hpp"
#include "emint/segmentation.hpp"
#include "test_util.hpp"

using namespace emint;

namespace {

// Independent enumeration: a start s is emitted iff frames [s, s+t) are all
// valid and s sits a multiple of `stride` past the start of its valid run.
std::vector<std::int64_t> brute_force_starts(const std::vector<std::uint8_t>& valid, int t, int stride) {
    std::vector<std::int64_t> out;
    const std::int64_t n = static_cast<std::int64_t>(valid.size());
    for (std::int64_t s = 0; s + t <= n; ++s) {
        bool all_valid = true;
        for (std::int64_t f = s; f < s + t; ++f)
            if (!valid[static_cast<std::size_t>(f)]) { all_valid = false; break; }
        if (!all_valid) continue;
        std::int64_t run_start = s;
        while (run_start > 0 && valid[static_cast<std::size_t>(run_start - 1)]) --run_start;
        if ((s - run_start) % stride == 0) out.push_back(s);
    }
    return out;
}

SegmentDataset tiny_dataset(const std::vector<std::pair<std::string, int>>& subject_labels) {
    SegmentDataset ds;
    ds.params = {4, 2};
    ds.d = 1;
    std::int64_t start = 0;
    for (const auto& [sid, label] : subject_labels) {
        WindowSpec w;
        w.subject_id = sid;
        w.video_id = sid + "_v";
        w.start = start++;
        w.label = label;
        ds.windows.push_back(w);
        ds.features.push_back(std::vector<float>(4, 0.5f));
    }
    return ds;
}

} // namespace

TEST_CASE("window counts for the documented cases") {
    std::vector<std::uint8_t> v16(16, 1);
    CHECK(segment_windows(v16, 16, 6).size() == 1);
    std::vector<std::uint8_t> v15(15, 1);
    CHECK(segment_windows(v15, 16, 6).empty());

    std::vector<std::uint8_t> v90(90, 1);
    const auto starts = segment_windows(v90, 16, 6);
    CHECK(starts.size() == 13); // floor((90-16)/6)+1
    CHECK(starts == brute_force_starts(std::vector<std::uint8_t>(90, 1), 16, 6));
    for (std::size_t i = 1; i < starts.size(); ++i) {
        const std::int64_t overlap = (starts[i - 1] + 16) - starts[i];
        CHECK(overlap == 10); // consecutive windows share exactly 10 frames
    }
}

TEST_CASE("windows never span invalid frames") {
    std::vector<std::uint8_t> mask(60, 1);
    mask[20] = 0;
    const auto starts = segment_windows(mask, 16, 6);
    for (const auto s : starts)
        for (std::int64_t f = s; f < s + 16; ++f) CHECK(mask[static_cast<std::size_t>(f)] == 1);
    CHECK(starts == brute_force_starts(mask, 16, 6));
}

TEST_CASE("segment_windows equals brute force over random masks and shapes") {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(0, 400));
        std::vector<std::uint8_t> mask(n);
        const double p_valid = rng.uniform(0.3, 1.0);
        for (auto& m : mask) m = rng.bernoulli(p_valid) ? 1 : 0;
        const int t = static_cast<int>(rng.uniform_int(1, 40));
        const int stride = static_cast<int>(rng.uniform_int(1, 12));
        CHECK(segment_windows(mask, t, stride) == brute_force_starts(mask, t, stride));
    }
}

TEST_CASE("segment_windows validates parameters") {
    std::vector<std::uint8_t> v(10, 1);
    CHECK_THROWS_AS(segment_windows(v, 0, 1), ValidationError);
    CHECK_THROWS_AS(segment_windows(v, 1, 0), ValidationError);
}

TEST_CASE("build_dataset labels windows by their last frame and checks lengths") {
    DatasetManifest manifest;
    SubjectEntry s;
    s.subject_id = "s0";
    RecordingEntry r;
    r.video_id = "v0";
    r.task_tag = "smile";
    r.batch = 1;
    s.recordings.push_back(r);
    manifest.subjects.push_back(s);

    IntensityTrace it;
    it.subject_id = "s0";
    it.video_id = "v0";
    const int n = 30;
    for (int f = 0; f < n; ++f) {
        it.intensity.push_back(f / 29.0);
        it.label.push_back(quantize_intensity(f / 29.0));
        it.valid.push_back(1);
    }
    FeatureMatrix fm;
    fm.rows = n;
    fm.cols = 2;
    fm.data.assign(static_cast<std::size_t>(n) * 2, 0.25f);

    std::map<std::string, IntensityTrace> traces{{"v0", it}};
    std::map<std::string, FeatureMatrix> features{{"v0", fm}};
    const SegmentDataset ds = build_dataset(manifest, traces, features, {16, 6});
    REQUIRE(ds.size() == 3); // starts 0, 6, 12
    for (const auto& w : ds.windows)
        CHECK(w.label == it.label[static_cast<std::size_t>(w.start + 15)]);
    CHECK(ds.d == 2);

    // length mismatch is an error
    features["v0"].rows = n - 1;
    features["v0"].data.resize(static_cast<std::size_t>(n - 1) * 2);
    CHECK_THROWS_AS(build_dataset(manifest, traces, features, {16, 6}), ValidationError);
}

TEST_CASE("empty manifest yields an empty dataset") {
    const SegmentDataset ds = build_dataset(DatasetManifest{}, {}, {}, {16, 6});
    CHECK(ds.empty());
}

TEST_CASE("subject split: 41 subjects at 0.7 gives 29/12; 26/41 reproduces 26/15") {
    std::vector<std::pair<std::string, int>> rows;
    for (int i = 0; i < 41; ++i)
        rows.push_back({"s" + std::to_string(100 + i), i % 11});
    const SegmentDataset ds = tiny_dataset(rows);

    const SubjectSplit split = split_by_subject(ds, 0.7, 5);
    CHECK(split.train_subjects.size() == 29); // round(0.7*41)
    CHECK(split.val_subjects.size() == 12);

    const SubjectSplit paper = split_by_subject(ds, 26.0 / 41.0, 5);
    CHECK(paper.train_subjects.size() == 26);
    CHECK(paper.val_subjects.size() == 15);
}

TEST_CASE("subject split: two subjects at one half") {
    const SegmentDataset ds = tiny_dataset({{"a", 1}, {"b", 2}});
    const SubjectSplit split = split_by_subject(ds, 0.5, 3);
    CHECK(split.train_subjects.size() == 1);
    CHECK(split.val_subjects.size() == 1);
}

TEST_CASE("subject split is deterministic, disjoint, and covers everything") {
    std::vector<std::pair<std::string, int>> rows;
    for (int i = 0; i < 17; ++i)
        for (int k = 0; k < 3; ++k) rows.push_back({"s" + std::to_string(i), (i + k) % 11});
    const SegmentDataset ds = tiny_dataset(rows);

    const SubjectSplit a = split_by_subject(ds, 0.7, 9);
    const SubjectSplit b = split_by_subject(ds, 0.7, 9);
    CHECK(a.train_subjects == b.train_subjects);
    CHECK(a.val_subjects == b.val_subjects);

    std::set<std::string> train(a.train_subjects.begin(), a.train_subjects.end());
    for (const auto& s : a.val_subjects) CHECK(!train.count(s));
    CHECK(a.train.size() + a.val.size() == ds.size());

    const SubjectSplit c = split_by_subject(ds, 0.7, 10);
    CHECK(a.train_subjects != c.train_subjects); // different seed moves subjects
}

TEST_CASE("split requires at least two subjects") {
    const SegmentDataset ds = tiny_dataset({{"only", 1}, {"only", 2}});
    CHECK_THROWS_AS(split_by_subject(ds, 0.5, 1), ValidationError);
    CHECK_THROWS_AS(split_by_subject(SegmentDataset{}, 0.5, 1), ValidationError);
}

TEST_CASE("dataset directory round-trip") {
    testutil::TempDir tmp("dataset");
    SegmentDataset ds = tiny_dataset({{"a", 3}, {"b", 7}});
    ds.windows[1].augmented = true;
    ds.features[0] = {0.1f, 0.2f, 0.3f, 0.4f};
    write_dataset(ds, tmp.path());
    const SegmentDataset back = load_dataset(tmp.path());
    REQUIRE(back.size() == 2);
    CHECK(back.params.t == ds.params.t);
    CHECK(back.params.stride == ds.params.stride);
    CHECK(back.d == ds.d);
    CHECK(back.windows[1].augmented);
    CHECK(back.windows[0].label == 3);
    CHECK(back.features[0] == ds.features[0]);
}
