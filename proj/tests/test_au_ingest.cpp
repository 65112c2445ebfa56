#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "emint/au_trace.hpp"
#include "emint/errors.hpp"
#include "emint/manifest.hpp"
#include "emint/synth.hpp"
#include "test_util.hpp"

using namespace emint;

TEST_CASE("header plus three zero rows parses to three valid zero frames") {
    const std::string text =
        "frame,valid,AU6L,AU6R,AU12L,AU12R\n"
        "0,1,0.0,0.0,0.0,0.0\n"
        "1,1,0.0,0.0,0.0,0.0\n"
        "2,1,0.0,0.0,0.0,0.0\n";
    const AUTrace t = parse_au_trace(text);
    CHECK(t.frame_count() == 3);
    CHECK(t.channels == std::vector<std::string>{"AU6L", "AU6R", "AU12L", "AU12R"});
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(t.valid[f] == 1);
        for (const double v : t.values[f]) CHECK(v == 0.0);
    }
}

TEST_CASE("value outside [0,1] reports row and column") {
    const std::string text =
        "frame,valid,AU6L\n"
        "0,1,0.5\n"
        "1,1,1.2\n";
    try {
        parse_au_trace(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
        CHECK(e.col() == 3);
        CHECK(std::string(e.what()).find("outside [0,1]") != std::string::npos);
    }
}

TEST_CASE("malformed inputs raise structured errors") {
    CHECK_THROWS_AS(parse_au_trace(""), ParseError);
    CHECK_THROWS_AS(parse_au_trace("nope,valid,AU1\n0,1,0.0\n"), ParseError);
    CHECK_THROWS_AS(parse_au_trace("frame,valid\n"), ParseError);                       // no channels
    CHECK_THROWS_AS(parse_au_trace("frame,valid,AU1,AU1\n0,1,0.0,0.0\n"), ParseError);  // dup channel
    CHECK_THROWS_AS(parse_au_trace("frame,valid,AU1\n0,1,zero\n"), ParseError);         // non-numeric
    CHECK_THROWS_AS(parse_au_trace("frame,valid,AU1\n1,1,0.0\n1,1,0.0\n"), ParseError); // non-monotone
    CHECK_THROWS_AS(parse_au_trace("frame,valid,AU1\n2,1,0.0\n1,1,0.0\n"), ParseError);
    CHECK_THROWS_AS(parse_au_trace("frame,valid,AU1\n0,2,0.0\n"), ParseError);          // bad valid flag
    CHECK_THROWS_AS(parse_au_trace("frame,valid,AU1\n0,1,0.0,0.9\n"), ParseError);      // field count
}

TEST_CASE("missing valid column defaults to all-valid") {
    const AUTrace t = parse_au_trace("frame,AU6L,AU6R\n0,0.1,0.2\n1,0.3,0.4\n");
    REQUIRE(t.frame_count() == 2);
    CHECK(t.valid[0] == 1);
    CHECK(t.valid[1] == 1);
    CHECK(t.values[1][0] == doctest::Approx(0.3));
}

TEST_CASE("skipped frame indices become masked placeholder rows") {
    const AUTrace t = parse_au_trace("frame,valid,AU1\n0,1,0.5\n3,1,0.7\n");
    REQUIRE(t.frame_count() == 4);
    CHECK(t.valid[0] == 1);
    CHECK(t.valid[1] == 0);
    CHECK(t.valid[2] == 0);
    CHECK(t.valid[3] == 1);
    CHECK(t.values[3][0] == doctest::Approx(0.7));
}

TEST_CASE("invalid rows keep their slot and values stay masked") {
    const AUTrace t = parse_au_trace("frame,valid,AU1\n0,1,0.5\n1,0,0.9\n2,1,0.1\n");
    REQUIRE(t.frame_count() == 3);
    CHECK(t.valid[1] == 0);
    CHECK(t.values[1][0] == doctest::Approx(0.9)); // placeholder kept, not dropped
}

TEST_CASE("synthetic recording round-trips bit-identically through serialize/parse") {
    CorpusConfig cfg = CorpusConfig::defaults();
    const SubjectProfile profile = gen_subject(cfg, 3);
    TaskScript script{TaskScript::Kind::pulse, 1.0, 90, 30.0, 0, "smile"};
    const GeneratedRecording rec = gen_recording(profile, script, 1234, cfg);

    const std::string once = serialize_au_trace(rec.trace);
    const AUTrace back = parse_au_trace(once);
    CHECK(back.channels == rec.trace.channels);
    CHECK(back.valid == rec.trace.valid);
    REQUIRE(back.frame_count() == rec.trace.frame_count());
    for (std::size_t f = 0; f < back.frame_count(); ++f)
        for (std::size_t c = 0; c < back.channels.size(); ++c)
            CHECK(back.values[f][c] == rec.trace.values[f][c]); // bit-exact at 6 decimals
    CHECK(serialize_au_trace(back) == once);
}

TEST_CASE("parser survives arbitrary byte input with structured errors") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::string junk;
        const auto len = gen() % 300;
        for (std::size_t i = 0; i < len; ++i) junk.push_back(static_cast<char>(gen() % 256));
        try {
            parse_au_trace(junk);
        } catch (const ParseError&) {
            // structured failure is the contract
        }
    }
}

TEST_CASE("manifest with 41 subjects across two batches parses with 41 unique subjects") {
    nlohmann::json doc;
    doc["subjects"] = nlohmann::json::array();
    for (int s = 0; s < 41; ++s) {
        nlohmann::json subject;
        subject["subject_id"] = "s" + std::to_string(s);
        subject["recordings"] = nlohmann::json::array(
            {{{"video_id", "v" + std::to_string(s)},
              {"trace_path", "t.csv"},
              {"features_path", nullptr},
              {"task_tag", "smile"},
              {"neutral_span", nullptr},
              {"batch", s % 2 == 0 ? 1 : 2}}});
        doc["subjects"].push_back(subject);
    }
    const DatasetManifest m = parse_manifest(doc.dump(), ".", false);
    CHECK(m.subjects.size() == 41);
}

TEST_CASE("empty subject list is a valid manifest") {
    const DatasetManifest m = parse_manifest(R"({"subjects": []})", ".", false);
    CHECK(m.subjects.empty());
    CHECK(m.recording_count() == 0);
}

TEST_CASE("manifest referencing a missing trace file names it") {
    const std::string doc = R"({"subjects": [{"subject_id": "a", "recordings": [
        {"video_id": "v", "trace_path": "does_not_exist.csv", "task_tag": "smile", "batch": 1}]}]})";
    try {
        parse_manifest(doc, "/tmp", true);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("does_not_exist.csv") != std::string::npos);
    }
}

TEST_CASE("manifest rejects duplicate ids and bad spans") {
    const std::string dup_subject = R"({"subjects": [
        {"subject_id": "a", "recordings": []},
        {"subject_id": "a", "recordings": []}]})";
    CHECK_THROWS_AS(parse_manifest(dup_subject, ".", false), ValidationError);

    const std::string dup_video = R"({"subjects": [{"subject_id": "a", "recordings": [
        {"video_id": "v", "trace_path": "t", "task_tag": "x", "batch": 1},
        {"video_id": "v", "trace_path": "t", "task_tag": "x", "batch": 1}]}]})";
    CHECK_THROWS_AS(parse_manifest(dup_video, ".", false), ValidationError);

    const std::string bad_span = R"({"subjects": [{"subject_id": "a", "recordings": [
        {"video_id": "v", "trace_path": "t", "task_tag": "x", "neutral_span": [10, 5], "batch": 1}]}]})";
    CHECK_THROWS_AS(parse_manifest(bad_span, ".", false), ValidationError);

    const std::string bad_batch = R"({"subjects": [{"subject_id": "a", "recordings": [
        {"video_id": "v", "trace_path": "t", "task_tag": "x", "batch": 3}]}]})";
    CHECK_THROWS_AS(parse_manifest(bad_batch, ".", false), ValidationError);
}

TEST_CASE("manifest serialization round-trips and relativizes paths") {
    testutil::TempDir tmp("manifest");
    const auto trace_path = tmp.path() / "traces" / "v0.csv";
    std::filesystem::create_directories(trace_path.parent_path());
    write_text_file(trace_path, "frame,valid,AU6L\n0,1,0.0\n");

    DatasetManifest m;
    m.base_dir = tmp.path();
    SubjectEntry s;
    s.subject_id = "s000";
    RecordingEntry r;
    r.video_id = "v0";
    r.trace_path = trace_path;
    r.task_tag = "smile";
    r.neutral_span = FrameSpan{0, 1};
    r.batch = 1;
    s.recordings.push_back(r);
    m.subjects.push_back(s);

    const std::string text = serialize_manifest(m);
    CHECK(text.find("traces/v0.csv") != std::string::npos);
    const DatasetManifest back = parse_manifest(text, tmp.path(), true);
    REQUIRE(back.subjects.size() == 1);
    CHECK(back.subjects[0].recordings[0].trace_path == trace_path);
    CHECK(back.subjects[0].recordings[0].neutral_span->end == 1);
}
