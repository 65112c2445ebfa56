#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emint/errors.hpp"
#include "emint/labeling.hpp"
#include "emint/num.hpp"
#include "emint/rng.hpp"

using namespace emint;

namespace {

AUTrace make_trace(std::vector<std::vector<double>> rows, std::vector<std::uint8_t> valid = {}) {
    AUTrace t;
    t.subject_id = "s";
    t.video_id = "v";
    t.channels = {"AU6L", "AU6R", "AU12L", "AU12R"};
    t.values = std::move(rows);
    t.valid = valid.empty() ? std::vector<std::uint8_t>(t.values.size(), 1) : std::move(valid);
    return t;
}

} // namespace

TEST_CASE("quantize rounds to the nearest tenth, half away from zero") {
    CHECK(quantize_intensity(0.37) == 4);
    CHECK(quantize_intensity(0.05) == 1);
    CHECK(quantize_intensity(1.0) == 10);
    CHECK(quantize_intensity(0.0) == 0);
    CHECK(quantize_intensity(0.449) == 4);
    CHECK(quantize_intensity(0.15) == 2);
    // out-of-range input clamps before quantization
    CHECK(quantize_intensity(1.7) == 10);
    CHECK(quantize_intensity(-0.3) == 0);
    CHECK_THROWS_AS(quantize_intensity(std::nan("")), ValidationError);
}

TEST_CASE("subject maxima: single-video peak") {
    auto t = make_trace({{0.1, 0.1, 0.2, 0.2}, {0.55, 0.3, 0.6, 0.5}, {0.2, 0.2, 0.3, 0.3}});
    const AUMaxima m = subject_au_maxima({&t, 1}, EmotionAUMap::happiness());
    CHECK(m.channel_max.at("AU6L") == doctest::Approx(0.55)); // peaks at 0.55
    CHECK(m.channel_max.at("AU12L") == doctest::Approx(0.6));
}

TEST_CASE("subject maxima: max across recordings") {
    auto a = make_trace({{0.2, 0.2, 0.3, 0.3}});
    auto b = make_trace({{0.2, 0.2, 0.7, 0.3}});
    std::vector<AUTrace> traces{a, b};
    const AUMaxima m = subject_au_maxima(traces, EmotionAUMap::happiness());
    CHECK(m.channel_max.at("AU12L") == doctest::Approx(0.7));
}

TEST_CASE("all-zero mapped channel is a degenerate subject") {
    auto t = make_trace({{0.0, 0.4, 0.5, 0.5}, {0.0, 0.5, 0.6, 0.6}});
    CHECK_THROWS_AS(subject_au_maxima({&t, 1}, EmotionAUMap::happiness()), ValidationError);
}

TEST_CASE("maxima ignore invalid frames") {
    auto t = make_trace({{0.2, 0.2, 0.3, 0.3}, {0.9, 0.9, 0.9, 0.9}}, {1, 0});
    const AUMaxima m = subject_au_maxima({&t, 1}, EmotionAUMap::happiness());
    CHECK(m.channel_max.at("AU6L") == doctest::Approx(0.2));
}

TEST_CASE("missing channel is reported") {
    AUTrace t;
    t.video_id = "v";
    t.channels = {"AU6L", "AU6R"};
    t.values = {{0.5, 0.5}};
    t.valid = {1};
    CHECK_THROWS_AS(subject_au_maxima({&t, 1}, EmotionAUMap::happiness()), ValidationError);
}

TEST_CASE("hand-evaluated normalization: mixed activations give intensity 0.5") {
    // AU6 pair at 0.25 with maxima 0.5 each; AU12 pair at 0.3 with maxima 0.6
    // each: (0.5)/2 + (0.5)/2 = 0.5.
    auto t = make_trace({{0.25, 0.25, 0.3, 0.3}});
    AUMaxima m;
    m.subject_id = "s";
    m.channel_max = {{"AU6L", 0.5}, {"AU6R", 0.5}, {"AU12L", 0.6}, {"AU12R", 0.6}};
    const IntensityTrace it = normalize_emotion_intensity(t, m, EmotionAUMap::happiness());
    CHECK(it.intensity[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(it.label[0] == 5);
}

TEST_CASE("frame at per-subject maxima scores exactly 1.0") {
    auto t = make_trace({{0.0, 0.0, 0.0, 0.0}, {0.52, 0.48, 0.71, 0.66}});
    const auto map = EmotionAUMap::happiness();
    const AUMaxima m = subject_au_maxima({&t, 1}, map);
    const IntensityTrace it = normalize_emotion_intensity(t, m, map);
    CHECK(it.intensity[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(it.label[1] == 10);
    CHECK(it.intensity[0] == 0.0); // neutral face scores zero
    CHECK(it.label[0] == 0);
}

TEST_CASE("scale invariance: scaling a subject's channels leaves the trace unchanged") {
    Rng rng(7);
    const auto map = EmotionAUMap::happiness();
    for (const double c : {0.25, 0.5, 0.9}) {
        std::vector<std::vector<double>> rows;
        for (int f = 0; f < 40; ++f) {
            std::vector<double> row;
            for (int ch = 0; ch < 4; ++ch) row.push_back(rng.uniform(0.01, 1.0));
            rows.push_back(row);
        }
        auto base = make_trace(rows);
        auto scaled = base;
        for (auto& row : scaled.values)
            for (auto& v : row) v *= c;

        const AUMaxima mb = subject_au_maxima({&base, 1}, map);
        const AUMaxima ms = subject_au_maxima({&scaled, 1}, map);
        const IntensityTrace ib = normalize_emotion_intensity(base, mb, map);
        const IntensityTrace is = normalize_emotion_intensity(scaled, ms, map);
        CHECK(ib.label == is.label);
        CHECK(serialize_intensity_trace(ib) == serialize_intensity_trace(is));
    }
}

TEST_CASE("monotonicity: raising a mapped AU never lowers intensity") {
    Rng rng(11);
    const auto map = EmotionAUMap::happiness();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> row;
        for (int ch = 0; ch < 4; ++ch) row.push_back(rng.uniform(0.0, 0.8));
        auto t = make_trace({row});
        AUMaxima m;
        m.channel_max = {{"AU6L", 0.9}, {"AU6R", 0.9}, {"AU12L", 0.9}, {"AU12R", 0.9}};
        const double before =
            normalize_emotion_intensity(t, m, map).intensity[0];
        const int ch = static_cast<int>(rng.uniform_int(0, 3));
        t.values[0][static_cast<std::size_t>(ch)] += rng.uniform(0.0, 0.2);
        const double after = normalize_emotion_intensity(t, m, map).intensity[0];
        CHECK(after >= before - 1e-15);
    }
}

TEST_CASE("quantization error stays within a half class width") {
    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = rng.uniform(-0.2, 1.2);
        const int label = quantize_intensity(x);
        const double clamped = std::clamp(x, 0.0, 1.0);
        CHECK(std::abs(label / 10.0 - clamped) <= 0.05 + 1e-12);
    }
}

TEST_CASE("intensity trace CSV round-trips") {
    IntensityTrace it;
    it.intensity = {0.0, 0.337, 1.0};
    it.label = {0, 3, 10};
    it.valid = {1, 0, 1};
    const std::string text = serialize_intensity_trace(it);
    const IntensityTrace back = parse_intensity_trace(text);
    CHECK(back.label == it.label);
    CHECK(back.valid == it.valid);
    CHECK(back.intensity[1] == doctest::Approx(0.337).epsilon(1e-9));
}

TEST_CASE("emotion map JSON round-trip and validation") {
    const auto map = EmotionAUMap::happiness();
    const auto back = parse_emotion_map(serialize_emotion_map(map));
    CHECK(back.emotion == "happiness");
    CHECK(back.terms == map.terms);

    CHECK_THROWS_AS(parse_emotion_map(R"({"emotion": "x", "terms": []})"), ValidationError);
    CHECK_THROWS_AS(parse_emotion_map(R"({"emotion": "x", "terms": [["A"], ["A"]]})"),
                    ValidationError);
}
