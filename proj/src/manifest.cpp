#include "emint/manifest.hpp"

#include <set>

#include <json.hpp>

#include "emint/au_trace.hpp"
#include "emint/errors.hpp"

namespace emint {

using nlohmann::json;

const SubjectEntry* DatasetManifest::find_subject(std::string_view subject_id) const {
    for (const auto& s : subjects)
        if (s.subject_id == subject_id) return &s;
    return nullptr;
}

const RecordingEntry* DatasetManifest::find_recording(std::string_view subject_id,
                                                      std::string_view video_id) const {
    const auto* s = find_subject(subject_id);
    if (!s) return nullptr;
    for (const auto& r : s->recordings)
        if (r.video_id == video_id) return &r;
    return nullptr;
}

std::size_t DatasetManifest::recording_count() const {
    std::size_t n = 0;
    for (const auto& s : subjects) n += s.recordings.size();
    return n;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return path;
    return base / path;
}

RecordingEntry parse_recording(const json& j, const std::filesystem::path& base,
                               const std::string& subject_id) {
    const std::string where = "subject '" + subject_id + "'";
    if (!j.is_object()) throw ValidationError(where + ": recording entry must be an object");
    for (const char* key : {"video_id", "trace_path", "task_tag", "batch"}) {
        if (!j.contains(key))
            throw ValidationError(where + ": recording missing required key '" + key + "'");
    }
    RecordingEntry r;
    r.video_id = j.at("video_id").get<std::string>();
    r.trace_path = resolve(base, j.at("trace_path").get<std::string>());
    r.task_tag = j.at("task_tag").get<std::string>();
    const int batch = j.at("batch").get<int>();
    if (batch != 1 && batch != 2)
        throw ValidationError(where + ", recording '" + r.video_id + "': batch must be 1 or 2");
    r.batch = batch;
    if (j.contains("features_path") && !j.at("features_path").is_null())
        r.features_path = resolve(base, j.at("features_path").get<std::string>());
    if (j.contains("neutral_span") && !j.at("neutral_span").is_null()) {
        const auto& span = j.at("neutral_span");
        if (!span.is_array() || span.size() != 2)
            throw ValidationError(where + ", recording '" + r.video_id +
                                  "': neutral_span must be [start,end]");
        FrameSpan fs{span.at(0).get<std::int64_t>(), span.at(1).get<std::int64_t>()};
        if (fs.begin < 0 || fs.end <= fs.begin)
            throw ValidationError(where + ", recording '" + r.video_id +
                                  "': neutral_span requires 0 <= start < end");
        r.neutral_span = fs;
    }
    return r;
}

} // namespace

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                               bool check_paths) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("manifest is not valid JSON");
    if (!doc.is_object() || !doc.contains("subjects") || !doc.at("subjects").is_array())
        throw ValidationError("manifest must be an object with a 'subjects' array");

    DatasetManifest m;
    m.base_dir = base_dir;
    std::set<std::string> subject_ids;
    std::set<std::pair<std::string, std::string>> recording_ids;

    for (const auto& js : doc.at("subjects")) {
        if (!js.is_object() || !js.contains("subject_id") || !js.contains("recordings"))
            throw ValidationError("subject entry requires 'subject_id' and 'recordings'");
        SubjectEntry s;
        s.subject_id = js.at("subject_id").get<std::string>();
        if (!subject_ids.insert(s.subject_id).second)
            throw ValidationError("duplicate subject_id '" + s.subject_id + "'");
        for (const auto& jr : js.at("recordings")) {
            RecordingEntry r = parse_recording(jr, base_dir, s.subject_id);
            if (!recording_ids.insert({s.subject_id, r.video_id}).second)
                throw ValidationError("duplicate (subject_id, video_id) pair ('" + s.subject_id +
                                      "', '" + r.video_id + "')");
            if (check_paths) {
                if (!std::filesystem::exists(r.trace_path))
                    throw ValidationError("dangling trace_path: " + r.trace_path.string());
                if (r.features_path && !std::filesystem::exists(*r.features_path))
                    throw ValidationError("dangling features_path: " + r.features_path->string());
            }
            s.recordings.push_back(std::move(r));
        }
        m.subjects.push_back(std::move(s));
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_manifest(read_text_file(path), dir);
}

namespace {

std::string relativize(const std::filesystem::path& base, const std::filesystem::path& p) {
    std::error_code ec;
    const auto rel = std::filesystem::relative(p, base, ec);
    if (!ec && !rel.empty()) return rel.generic_string();
    return p.generic_string();
}

} // namespace

std::string serialize_manifest(const DatasetManifest& manifest) {
    json doc;
    doc["subjects"] = json::array();
    for (const auto& s : manifest.subjects) {
        json js;
        js["subject_id"] = s.subject_id;
        js["recordings"] = json::array();
        for (const auto& r : s.recordings) {
            json jr;
            jr["video_id"] = r.video_id;
            jr["trace_path"] = relativize(manifest.base_dir, r.trace_path);
            jr["features_path"] =
                r.features_path ? json(relativize(manifest.base_dir, *r.features_path)) : json(nullptr);
            jr["task_tag"] = r.task_tag;
            jr["neutral_span"] =
                r.neutral_span ? json::array({r.neutral_span->begin, r.neutral_span->end}) : json(nullptr);
            jr["batch"] = r.batch;
            js["recordings"].push_back(std::move(jr));
        }
        doc["subjects"].push_back(std::move(js));
    }
    return doc.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    write_text_file(path, serialize_manifest(manifest));
}

} // namespace emint
