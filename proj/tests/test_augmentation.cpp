#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "emint/augmentation.hpp"
#include "emint/errors.hpp"
#include "emint/synth.hpp"

using namespace emint;

namespace {

IntensityTrace trace_from_values(std::vector<double> intensity, std::vector<std::uint8_t> valid = {}) {
    IntensityTrace t;
    t.subject_id = "s";
    t.video_id = "v";
    t.valid = valid.empty() ? std::vector<std::uint8_t>(intensity.size(), 1) : std::move(valid);
    for (const double x : intensity) t.label.push_back(quantize_intensity(x));
    t.intensity = std::move(intensity);
    return t;
}

// Reference smoothing + central-difference slope, written independently of
// the implementation.
std::vector<double> reference_slope(const std::vector<double>& x, int w) {
    const int n = static_cast<int>(x.size());
    const int h = w / 2;
    std::vector<double> sm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - h);
        const int hi = std::min(n - 1, i + h);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += x[static_cast<std::size_t>(j)];
        sm[static_cast<std::size_t>(i)] = acc / (hi - lo + 1);
    }
    std::vector<double> slope(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - 1);
        const int hi = std::min(n - 1, i + 1);
        if (hi > lo)
            slope[static_cast<std::size_t>(i)] =
                (sm[static_cast<std::size_t>(hi)] - sm[static_cast<std::size_t>(lo)]) / (hi - lo);
    }
    return slope;
}

} // namespace

TEST_CASE("constant intensity has no transition spans") {
    const auto t = trace_from_values(std::vector<double>(60, 0.4));
    CHECK(detect_transitions(t, 5, 0.01).empty());
}

TEST_CASE("linear ramp yields one rising span covering the interior") {
    std::vector<double> ramp;
    for (int i = 0; i < 50; ++i) ramp.push_back(i / 49.0); // slope ~0.0204 per frame
    const auto t = trace_from_values(ramp);
    const auto spans = detect_transitions(t, 5, 0.01);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].direction == TransitionSpan::Direction::rising);
    CHECK(spans[0].mean_abs_slope == doctest::Approx(1.0 / 49.0).epsilon(0.05));

    // The span must match the reference slope rule exactly.
    const auto slope = reference_slope(ramp, 5);
    std::int64_t lo = -1, hi = -1;
    for (int i = 0; i < 50; ++i) {
        if (slope[static_cast<std::size_t>(i)] >= 0.01) {
            if (lo < 0) lo = i;
            hi = i + 1;
        }
    }
    CHECK(spans[0].begin == lo);
    CHECK(spans[0].end == hi);
}

TEST_CASE("synthetic pulse yields exactly one rising and one falling span") {
    CorpusConfig cfg = CorpusConfig::exact_labeling();
    const SubjectProfile profile = gen_subject(cfg, 0);
    TaskScript script{TaskScript::Kind::pulse, 1.0, 120, 30.0, 0, "smile"};
    const GeneratedRecording rec = gen_recording(profile, script, 77, cfg);

    IntensityTrace t;
    t.video_id = "v";
    t.intensity = rec.ground_truth;
    t.valid.assign(rec.ground_truth.size(), 1);
    for (const double g : rec.ground_truth) t.label.push_back(quantize_intensity(g));

    const auto spans = detect_transitions(t, 5, 0.01);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].direction == TransitionSpan::Direction::rising);
    CHECK(spans[1].direction == TransitionSpan::Direction::falling);
    CHECK(spans[0].end <= spans[1].begin);
    // both sit around the mid-video peak
    CHECK(spans[0].begin >= 120 / 2 - cfg.speed_min - 4);
    CHECK(spans[1].end <= 120 / 2 + cfg.speed_max + 4);
}

TEST_CASE("gaps restart span detection") {
    std::vector<double> ramp;
    for (int i = 0; i < 60; ++i) ramp.push_back(i / 59.0);
    std::vector<std::uint8_t> valid(60, 1);
    valid[30] = 0;
    const auto t = trace_from_values(ramp, valid);
    const auto spans = detect_transitions(t, 5, 0.01);
    CHECK(spans.size() == 2);
    for (const auto& s : spans) {
        const bool crosses_gap = s.begin <= 30 && s.end > 30;
        CHECK(!crosses_gap);
    }
}

TEST_CASE("detector validates parameters") {
    const auto t = trace_from_values(std::vector<double>(10, 0.0));
    CHECK_THROWS_AS(detect_transitions(t, 4, 0.01), ValidationError);  // even window
    CHECK_THROWS_AS(detect_transitions(t, 5, 0.0), ValidationError);   // zero threshold
}

namespace {

// One synthetic video: rest, ramp up, plateau, ramp down, rest.
struct AugFixture {
    DatasetManifest manifest;
    std::map<std::string, IntensityTrace> traces;
    std::map<std::string, FeatureMatrix> features;
    std::map<std::string, std::vector<TransitionSpan>> transitions;
    SegmentDataset base;

    AugFixture() {
        std::vector<double> curve;
        for (int i = 0; i < 30; ++i) curve.push_back(0.0);
        for (int i = 0; i <= 20; ++i) curve.push_back(i / 20.0);
        for (int i = 0; i < 30; ++i) curve.push_back(1.0);
        for (int i = 19; i >= 0; --i) curve.push_back(i / 20.0);
        for (int i = 0; i < 30; ++i) curve.push_back(0.0);

        IntensityTrace t = trace_from_values(curve);
        t.video_id = "v0";
        t.subject_id = "s0";
        traces.emplace("v0", t);

        FeatureMatrix fm;
        fm.rows = static_cast<std::uint32_t>(curve.size());
        fm.cols = 1;
        for (const double x : curve) fm.data.push_back(static_cast<float>(x));
        features.emplace("v0", fm);

        SubjectEntry s;
        s.subject_id = "s0";
        RecordingEntry r;
        r.video_id = "v0";
        r.task_tag = "smile";
        r.batch = 1;
        s.recordings.push_back(r);
        manifest.subjects.push_back(s);

        base = build_dataset(manifest, traces, features, {16, 6});
        transitions.emplace("v0", detect_transitions(t, 5, 0.01));
    }
};

} // namespace

TEST_CASE("augmentation adds valid, correctly-labeled windows and never touches base ones") {
    AugFixture fx;
    const auto result = augment_transitional(fx.base, fx.transitions, fx.traces, fx.features, 0, 1);
    const auto& ds = result.dataset;

    REQUIRE(ds.size() > fx.base.size());
    // base windows are untouched, in order
    for (std::size_t i = 0; i < fx.base.size(); ++i) {
        CHECK(ds.windows[i].video_id == fx.base.windows[i].video_id);
        CHECK(ds.windows[i].start == fx.base.windows[i].start);
        CHECK(ds.windows[i].label == fx.base.windows[i].label);
        CHECK(!ds.windows[i].augmented);
    }
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (const auto& w : ds.windows)
        CHECK(seen.insert({w.video_id, w.start}).second); // dedup by (video, start)

    const auto& trace = fx.traces.at("v0");
    for (std::size_t i = fx.base.size(); i < ds.size(); ++i) {
        const auto& w = ds.windows[i];
        CHECK(w.augmented);
        for (std::int64_t f = w.start; f < w.start + 16; ++f)
            CHECK(trace.valid[static_cast<std::size_t>(f)] == 1);
        CHECK(w.label == trace.label[static_cast<std::size_t>(w.start + 15)]); // label recomputed
        bool in_span = false;
        for (const auto& span : fx.transitions.at("v0"))
            if (w.start + 15 >= span.begin && w.start + 15 < span.end) in_span = true;
        CHECK(in_span);
    }

    CHECK(result.report.augmented ==
          static_cast<std::int64_t>(ds.size()) - static_cast<std::int64_t>(fx.base.size()));
    CHECK(result.report.ratio_after <= result.report.ratio_before + 1e-12);
    std::int64_t delta_sum = 0;
    for (std::size_t c = 0; c < 11; ++c) {
        CHECK(result.report.after[c] >= result.report.before[c]);
        delta_sum += result.report.after[c] - result.report.before[c];
    }
    CHECK(delta_sum == result.report.augmented);
}

TEST_CASE("target at current counts adds nothing") {
    AugFixture fx;
    std::int64_t max_count = 0;
    for (const auto c : fx.base.class_counts()) max_count = std::max(max_count, c);
    // every class already at or above a target of 1? use per-class exact counts:
    const auto result = augment_transitional(fx.base, fx.transitions, fx.traces, fx.features, 1, 1);
    std::int64_t added_below_one = 0;
    for (std::size_t c = 0; c < 11; ++c)
        if (fx.base.class_counts()[c] >= 1)
            added_below_one += result.report.after[c] - result.report.before[c];
    CHECK(added_below_one == 0); // populated classes gain nothing at target 1
}

TEST_CASE("unreachable class shows up as a shortfall") {
    AugFixture fx;
    // huge target: transition material runs out for some classes
    const auto result =
        augment_transitional(fx.base, fx.transitions, fx.traces, fx.features, 100000, 1);
    CHECK(!result.report.shortfall_classes.empty());
}

TEST_CASE("dense stride must undercut the base stride") {
    AugFixture fx;
    CHECK_THROWS_AS(augment_transitional(fx.base, fx.transitions, fx.traces, fx.features, 0, 6),
                    ValidationError);
    CHECK_THROWS_AS(augment_transitional(fx.base, fx.transitions, fx.traces, fx.features, 0, 0),
                    ValidationError);
}
