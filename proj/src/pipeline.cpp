#include "emint/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "emint/adaptive.hpp"
#include "emint/augmentation.hpp"
#include "emint/errors.hpp"
#include "emint/evaluation.hpp"
#include "emint/num.hpp"
#include "emint/rng.hpp"
#include "emint/segmentation.hpp"
#include "emint/svg_report.hpp"

namespace emint {

using nlohmann::json;
namespace fs = std::filesystem;

PipelineConfig PipelineConfig::from_json(const json& doc) {
    PipelineConfig c;
    const auto get = [&](const char* section) -> json {
        return doc.contains(section) ? doc.at(section) : json::object();
    };
    const json paths = get("paths");
    if (paths.contains("corpus_dir")) c.corpus_dir = paths.at("corpus_dir").get<std::string>();
    if (paths.contains("work_dir")) c.work_dir = paths.at("work_dir").get<std::string>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();

    const json gen = get("gen");
    if (gen.contains("preset")) c.gen_preset = gen.at("preset").get<std::string>();
    if (gen.contains("subjects")) c.gen_subjects = gen.at("subjects").get<int>();

    const json lab = get("labeling");
    if (lab.contains("emotion_map") && !lab.at("emotion_map").is_null())
        c.emotion_map_file = lab.at("emotion_map").get<std::string>();
    if (lab.contains("task_filter") && !lab.at("task_filter").is_null())
        c.task_filter = lab.at("task_filter").get<std::vector<std::string>>();

    const json seg = get("segmentation");
    if (seg.contains("t")) c.window_t = seg.at("t").get<int>();
    if (seg.contains("stride")) c.window_stride = seg.at("stride").get<int>();

    const json aug = get("augmentation");
    if (aug.contains("smooth_window")) c.smooth_window = aug.at("smooth_window").get<int>();
    if (aug.contains("slope_threshold")) c.slope_threshold = aug.at("slope_threshold").get<double>();
    if (aug.contains("dense_stride")) c.dense_stride = aug.at("dense_stride").get<int>();
    if (aug.contains("target")) c.balance_target = aug.at("target").get<std::int64_t>();

    const json split = get("split");
    if (split.contains("fraction")) c.split_fraction = split.at("fraction").get<double>();
    if (split.contains("mode")) c.split_mode = split.at("mode").get<std::string>();

    const json sc = get("scorer");
    if (sc.contains("hidden_units")) c.scorer.hidden_units = sc.at("hidden_units").get<int>();
    if (sc.contains("learning_rate")) c.scorer.learning_rate = sc.at("learning_rate").get<double>();
    if (sc.contains("momentum")) c.scorer.momentum = sc.at("momentum").get<double>();
    if (sc.contains("lr_step_epochs")) c.scorer.lr_step_epochs = sc.at("lr_step_epochs").get<int>();
    if (sc.contains("lr_gamma")) c.scorer.lr_gamma = sc.at("lr_gamma").get<double>();
    if (sc.contains("epochs")) c.scorer.epochs = sc.at("epochs").get<int>();
    if (sc.contains("batch_size")) c.scorer.batch_size = sc.at("batch_size").get<int>();
    if (sc.contains("seed")) c.scorer.seed = sc.at("seed").get<std::uint64_t>();

    const json ad = get("adapt");
    if (ad.contains("iterations")) c.adapt_iterations = ad.at("iterations").get<int>();
    if (ad.contains("videos_per_iteration"))
        c.adapt_videos_per_iteration = ad.at("videos_per_iteration").get<int>();
    if (ad.contains("k")) c.adapt_k = ad.at("k").get<int>();

    const json ev = get("eval");
    if (ev.contains("include_augmented"))
        c.eval_include_augmented = ev.at("include_augmented").get<bool>();
    return c;
}

json PipelineConfig::to_json() const {
    json doc;
    doc["paths"] = {{"corpus_dir", corpus_dir.generic_string()}, {"work_dir", work_dir.generic_string()}};
    doc["seed"] = seed;
    doc["gen"] = {{"preset", gen_preset}, {"subjects", gen_subjects}};
    doc["labeling"] = {
        {"emotion_map", emotion_map_file.empty() ? json(nullptr) : json(emotion_map_file.generic_string())},
        {"task_filter", task_filter.empty() ? json(nullptr) : json(task_filter)}};
    doc["segmentation"] = {{"t", window_t}, {"stride", window_stride}};
    doc["augmentation"] = {{"smooth_window", smooth_window},
                           {"slope_threshold", slope_threshold},
                           {"dense_stride", dense_stride},
                           {"target", balance_target}};
    doc["split"] = {{"fraction", split_fraction}, {"mode", split_mode}};
    doc["scorer"] = {{"hidden_units", scorer.hidden_units}, {"learning_rate", scorer.learning_rate},
                     {"momentum", scorer.momentum},         {"lr_step_epochs", scorer.lr_step_epochs},
                     {"lr_gamma", scorer.lr_gamma},         {"epochs", scorer.epochs},
                     {"batch_size", scorer.batch_size},     {"seed", scorer.seed}};
    doc["adapt"] = {{"iterations", adapt_iterations},
                    {"videos_per_iteration", adapt_videos_per_iteration},
                    {"k", adapt_k}};
    doc["eval"] = {{"include_augmented", eval_include_augmented}};
    return doc;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    const json doc = json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded()) throw ParseError("config is not valid JSON: " + path.string());
    return from_json(doc);
}

void PipelineConfig::apply_override(json& doc, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos)
        throw ValidationError("--set expects key=value, got '" + key_value + "'");
    std::string key = key_value.substr(0, eq);
    const std::string value = key_value.substr(eq + 1);
    std::replace(key.begin(), key.end(), '.', '/');

    json parsed;
    if (value == "true") parsed = true;
    else if (value == "false") parsed = false;
    else if (value == "null") parsed = nullptr;
    else if (const auto i = parse_int(value); i && value.find('.') == std::string::npos) parsed = *i;
    else if (const auto d = parse_double(value)) parsed = *d;
    else parsed = value;

    doc[json::json_pointer("/" + key)] = parsed;
}

CorpusConfig PipelineConfig::corpus_config() const {
    CorpusConfig c;
    if (gen_preset == "default") c = CorpusConfig::defaults();
    else if (gen_preset == "exact-labeling") c = CorpusConfig::exact_labeling();
    else if (gen_preset == "paper-counts") c = CorpusConfig::paper_counts();
    else if (gen_preset == "adaptation-study") c = CorpusConfig::adaptation_study();
    else throw ValidationError("unknown gen preset '" + gen_preset + "'");
    c.seed = seed;
    if (gen_subjects > 0) c.n_subjects = gen_subjects;
    return c;
}

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const {
    return derive_seed(seed, stage);
}

namespace pipeline {

namespace {

// ---- stage stamps ---------------------------------------------------------

std::string fingerprint(const std::string& stage, const json& section, const std::string& parent) {
    const std::string blob = stage + "|" + section.dump() + "|" + parent;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(blob)));
    return buf;
}

void write_stamp(const fs::path& dir, const std::string& stage, const std::string& fp) {
    json doc{{"stage", stage}, {"fingerprint", fp}};
    write_text_file(dir / "stamp.json", doc.dump(2) + "\n");
}

// Verifies that the artifact at `dir` exists and was produced under the
// currently-configured upstream fingerprint.
void require_stamp(const fs::path& dir, const std::string& stage, const std::string& expected_fp) {
    const auto stamp_path = dir / "stamp.json";
    if (!fs::exists(stamp_path))
        throw ValidationError("missing artifact '" + stamp_path.string() + "'; run '" + stage +
                              "' first");
    const json doc = json::parse(read_text_file(stamp_path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("fingerprint"))
        throw ValidationError("corrupt stamp: " + stamp_path.string());
    if (doc.at("fingerprint").get<std::string>() != expected_fp)
        throw ValidationError("stale artifact '" + dir.string() + "' (configuration changed); rerun '" +
                              stage + "'");
}

json section_gen(const PipelineConfig& c) {
    return json{{"seed", c.seed}, {"preset", c.gen_preset}, {"subjects", c.gen_subjects}};
}
json section_label(const PipelineConfig& c) {
    return json{{"emotion_map", c.emotion_map_file.generic_string()}, {"task_filter", c.task_filter}};
}
json section_segment(const PipelineConfig& c) {
    return json{{"t", c.window_t}, {"stride", c.window_stride}};
}
json section_augment(const PipelineConfig& c) {
    return json{{"smooth_window", c.smooth_window},
                {"slope_threshold", c.slope_threshold},
                {"dense_stride", c.dense_stride},
                {"target", c.balance_target}};
}
json section_split(const PipelineConfig& c) {
    return json{{"seed", c.seed}, {"fraction", c.split_fraction}, {"mode", c.split_mode}};
}
json section_train(const PipelineConfig& c) {
    json s = c.to_json().at("scorer");
    s["master_seed"] = c.seed;
    return s;
}
json section_adapt(const PipelineConfig& c) {
    return json{{"seed", c.seed},
                {"iterations", c.adapt_iterations},
                {"videos_per_iteration", c.adapt_videos_per_iteration},
                {"k", c.adapt_k}};
}
json section_eval(const PipelineConfig& c) {
    return json{{"include_augmented", c.eval_include_augmented}};
}

std::string fp_gen(const PipelineConfig& c) { return fingerprint("gen", section_gen(c), ""); }
std::string fp_label(const PipelineConfig& c) { return fingerprint("label", section_label(c), fp_gen(c)); }
std::string fp_segment(const PipelineConfig& c) {
    return fingerprint("segment", section_segment(c), fp_label(c));
}
std::string fp_augment(const PipelineConfig& c) {
    return fingerprint("augment", section_augment(c), fp_segment(c));
}
std::string fp_split(const PipelineConfig& c) { return fingerprint("split", section_split(c), fp_augment(c)); }
std::string fp_train(const PipelineConfig& c) { return fingerprint("train", section_train(c), fp_split(c)); }
std::string fp_adapt(const PipelineConfig& c) { return fingerprint("adapt", section_adapt(c), fp_train(c)); }
std::string fp_eval(const PipelineConfig& c) {
    return fingerprint("eval", section_eval(c), fp_train(c));
}
std::string fp_report(const PipelineConfig& c) {
    return fingerprint("report", json::object(), fp_eval(c) + fp_adapt(c) + fp_augment(c));
}

// ---- shared loading -------------------------------------------------------

EmotionAUMap effective_map(const PipelineConfig& config) {
    if (config.emotion_map_file.empty()) return EmotionAUMap::happiness();
    return parse_emotion_map(read_text_file(config.emotion_map_file));
}

DatasetManifest load_corpus_manifest(const PipelineConfig& config) {
    const auto path = config.corpus_dir / "manifest.json";
    if (!fs::exists(path))
        throw ValidationError("missing artifact '" + path.string() + "'; run 'gen' first");
    return load_manifest(path);
}

std::map<std::string, IntensityTrace> load_label_traces(const PipelineConfig& config,
                                                        const DatasetManifest& manifest) {
    std::map<std::string, IntensityTrace> traces;
    for (const auto& s : manifest.subjects) {
        for (const auto& r : s.recordings) {
            auto t = parse_intensity_trace(
                read_text_file(config.work_dir / "labels" / (r.video_id + ".csv")));
            t.subject_id = s.subject_id;
            t.video_id = r.video_id;
            traces.emplace(r.video_id, std::move(t));
        }
    }
    return traces;
}

std::map<std::string, FeatureMatrix> load_recording_features(const PipelineConfig& config,
                                                             const DatasetManifest& manifest) {
    const EmotionAUMap map = effective_map(config);
    std::map<std::string, FeatureMatrix> features;
    for (const auto& s : manifest.subjects) {
        for (const auto& r : s.recordings) {
            if (r.features_path) {
                features.emplace(r.video_id, read_feature_matrix(*r.features_path));
            } else {
                AUTrace trace = load_au_trace(r.trace_path);
                trace.subject_id = s.subject_id;
                trace.video_id = r.video_id;
                features.emplace(r.video_id, au_features(trace, map));
            }
        }
    }
    return features;
}

struct SplitFile {
    std::vector<std::string> train_subjects;
    std::vector<std::string> val_subjects;
};

SplitFile load_split(const PipelineConfig& config) {
    const json doc =
        json::parse(read_text_file(config.work_dir / "split" / "split.json"), nullptr, false);
    if (doc.is_discarded()) throw ValidationError("corrupt split.json");
    SplitFile s;
    s.train_subjects = doc.at("train_subjects").get<std::vector<std::string>>();
    s.val_subjects = doc.at("val_subjects").get<std::vector<std::string>>();
    return s;
}

} // namespace

// ---- stages ----------------------------------------------------------------

json run_gen(const PipelineConfig& config) {
    const CorpusConfig cc = config.corpus_config();
    const DatasetManifest manifest = gen_corpus(cc, config.corpus_dir);
    write_stamp(config.corpus_dir, "gen", fp_gen(config));
    return json{{"stage", "gen"},
                {"corpus_dir", config.corpus_dir.generic_string()},
                {"subjects", manifest.subjects.size()},
                {"recordings", manifest.recording_count()}};
}

json run_label(const PipelineConfig& config) {
    require_stamp(config.corpus_dir, "gen", fp_gen(config));
    const DatasetManifest manifest = load_corpus_manifest(config);
    const EmotionAUMap map = effective_map(config);

    const auto out_dir = config.work_dir / "labels";
    fs::create_directories(out_dir);

    json maxima_doc = json::object();
    std::map<std::string, IntensityTrace> traces;
    std::size_t labeled = 0;
    for (const auto& subject : manifest.subjects) {
        // Maxima scope: recordings matching the task filter (all when unset).
        std::vector<AUTrace> scope;
        std::vector<std::pair<const RecordingEntry*, AUTrace>> all;
        for (const auto& rec : subject.recordings) {
            AUTrace t = load_au_trace(rec.trace_path);
            t.subject_id = subject.subject_id;
            t.video_id = rec.video_id;
            const bool in_scope =
                config.task_filter.empty() ||
                std::find(config.task_filter.begin(), config.task_filter.end(), rec.task_tag) !=
                    config.task_filter.end();
            if (in_scope) scope.push_back(t);
            all.emplace_back(&rec, std::move(t));
        }
        if (scope.empty())
            throw ValidationError("subject '" + subject.subject_id +
                                  "' has no recordings matching the task filter");
        const AUMaxima maxima = subject_au_maxima(scope, map);
        json jm = json::object();
        for (const auto& [ch, mx] : maxima.channel_max) jm[ch] = mx;
        maxima_doc[subject.subject_id] = std::move(jm);

        for (auto& [rec, trace] : all) {
            IntensityTrace it = normalize_emotion_intensity(trace, maxima, map);
            write_text_file(out_dir / (rec->video_id + ".csv"), serialize_intensity_trace(it));
            traces.emplace(rec->video_id, std::move(it));
            ++labeled;
        }
    }
    write_text_file(out_dir / "maxima.json", maxima_doc.dump(2) + "\n");

    const TaskIntensityReport task_report = max_intensity_by_task(manifest, traces);
    write_text_file(out_dir / "task_report.json", task_report.to_json());

    write_stamp(out_dir, "label", fp_label(config));
    return json{{"stage", "label"}, {"recordings", labeled}};
}

json run_segment(const PipelineConfig& config) {
    require_stamp(config.work_dir / "labels", "label", fp_label(config));
    const DatasetManifest manifest = load_corpus_manifest(config);
    const auto traces = load_label_traces(config, manifest);
    const auto features = load_recording_features(config, manifest);

    const SegmentDataset ds =
        build_dataset(manifest, traces, features, SegmentParams{config.window_t, config.window_stride});
    const auto out_dir = config.work_dir / "dataset";
    fs::create_directories(out_dir);
    write_dataset(ds, out_dir);
    write_stamp(out_dir, "segment", fp_segment(config));

    return json{{"stage", "segment"}, {"windows", ds.size()}, {"t", ds.params.t},
                {"stride", ds.params.stride}, {"d", ds.d}};
}

json run_augment(const PipelineConfig& config) {
    require_stamp(config.work_dir / "dataset", "segment", fp_segment(config));
    const DatasetManifest manifest = load_corpus_manifest(config);
    const auto traces = load_label_traces(config, manifest);
    const auto features = load_recording_features(config, manifest);
    const SegmentDataset base = load_dataset(config.work_dir / "dataset");

    std::map<std::string, std::vector<TransitionSpan>> transitions;
    for (const auto& [vid, trace] : traces)
        transitions.emplace(vid, detect_transitions(trace, config.smooth_window, config.slope_threshold));

    const AugmentResult result = augment_transitional(base, transitions, traces, features,
                                                      config.balance_target, config.dense_stride);
    const auto out_dir = config.work_dir / "augmented";
    fs::create_directories(out_dir);
    write_dataset(result.dataset, out_dir);
    write_text_file(out_dir / "balance_report.json", result.report.to_json());
    write_text_file(out_dir / "balance_hist.csv", result.report.histogram_csv());
    write_stamp(out_dir, "augment", fp_augment(config));

    return json{{"stage", "augment"},
                {"windows", result.dataset.size()},
                {"augmented", result.report.augmented},
                {"ratio_before", result.report.ratio_before},
                {"ratio_after", result.report.ratio_after}};
}

json run_split(const PipelineConfig& config) {
    require_stamp(config.work_dir / "augmented", "augment", fp_augment(config));
    const SegmentDataset ds = load_dataset(config.work_dir / "augmented");

    std::vector<std::string> train_subjects;
    std::vector<std::string> val_subjects;
    if (config.split_mode == "subject") {
        const SubjectSplit split =
            split_by_subject(ds, config.split_fraction, config.stage_seed("split"));
        train_subjects = split.train_subjects;
        val_subjects = split.val_subjects;
    } else if (config.split_mode == "batch") {
        // Published protocol: short plateau recordings (batch 2) train the
        // model, long pulse recordings (batch 1) validate it.
        const DatasetManifest manifest = load_corpus_manifest(config);
        for (const auto& s : manifest.subjects) {
            if (s.recordings.empty()) continue;
            (s.recordings.front().batch == 2 ? train_subjects : val_subjects).push_back(s.subject_id);
        }
        std::sort(train_subjects.begin(), train_subjects.end());
        std::sort(val_subjects.begin(), val_subjects.end());
        if (train_subjects.empty() || val_subjects.empty())
            throw ValidationError("batch split: need both batch-1 and batch-2 subjects");
    } else {
        throw ValidationError("unknown split mode '" + config.split_mode + "'");
    }

    const auto out_dir = config.work_dir / "split";
    fs::create_directories(out_dir);
    json doc{{"mode", config.split_mode},
             {"fraction", config.split_fraction},
             {"seed", config.stage_seed("split")},
             {"train_subjects", train_subjects},
             {"val_subjects", val_subjects}};
    write_text_file(out_dir / "split.json", doc.dump(2) + "\n");
    write_stamp(out_dir, "split", fp_split(config));

    return json{{"stage", "split"},
                {"train_subjects", train_subjects.size()},
                {"val_subjects", val_subjects.size()}};
}

json run_train(const PipelineConfig& config) {
    require_stamp(config.work_dir / "split", "split", fp_split(config));
    const SegmentDataset ds = load_dataset(config.work_dir / "augmented");
    const SplitFile split = load_split(config);
    const SegmentDataset train_set = filter_by_subjects(ds, split.train_subjects);
    if (train_set.empty()) throw ValidationError("train: empty training set");

    ScorerConfig sc = config.scorer;
    if (sc.seed == 0) sc.seed = config.stage_seed("train");
    ScorerModel model = ScorerModel::init(train_set.params.t, train_set.d, sc);
    const auto curve = train(model, train_set, sc);

    const auto out_dir = config.work_dir / "model";
    fs::create_directories(out_dir);
    save_checkpoint(model, out_dir / "model.ckpt");

    std::string log = "epoch,mean_loss,lr\n";
    for (std::size_t e = 0; e < curve.size(); ++e) {
        log += std::to_string(e + 1);
        log += ',';
        log += format_fixed(curve[e].mean_loss, 6);
        log += ',';
        log += format_fixed(curve[e].lr, 8);
        log += '\n';
    }
    write_text_file(out_dir / "train_log.csv", log);
    write_stamp(out_dir, "train", fp_train(config));

    // Training accuracy for the summary.
    const auto preds = model.predict(train_set);
    std::int64_t exact = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == train_set.windows[i].label) ++exact;

    return json{{"stage", "train"},
                {"train_windows", train_set.size()},
                {"epochs", curve.size()},
                {"final_loss", curve.empty() ? 0.0 : curve.back().mean_loss},
                {"train_exact", static_cast<double>(exact) / static_cast<double>(train_set.size())},
                {"checkpoint", (out_dir / "model.ckpt").generic_string()}};
}

json run_adapt(const PipelineConfig& config) {
    require_stamp(config.work_dir / "model", "train", fp_train(config));
    const DatasetManifest manifest = load_corpus_manifest(config);
    const SegmentDataset ds = load_dataset(config.work_dir / "augmented");
    const SplitFile split = load_split(config);
    const ScorerModel base = load_checkpoint(config.work_dir / "model" / "model.ckpt");

    AdaptConfig ac;
    ac.iterations = config.adapt_iterations;
    ac.videos_per_iteration = config.adapt_videos_per_iteration;
    ac.k = config.adapt_k;
    ac.finetune = base.config();
    ac.finetune.epochs = 1;

    json per_subject = json::array();
    std::vector<std::string> skipped;
    std::vector<double> gains;
    std::vector<std::vector<double>> curves;
    std::array<std::int64_t, 11> pooled_base{};
    std::array<std::int64_t, 11> pooled_adapted{};

    for (const auto& sid : split.val_subjects) {
        const SubjectEntry* subject = manifest.find_subject(sid);
        if (!subject) continue;
        const bool has_span = std::any_of(subject->recordings.begin(), subject->recordings.end(),
                                          [](const RecordingEntry& r) { return r.neutral_span.has_value(); });
        if (!has_span) {
            skipped.push_back(sid);
            continue;
        }
        AdaptConfig sac = ac;
        sac.seed = derive_seed(config.stage_seed("adapt"), sid);
        AdaptPlan plan;
        try {
            plan = build_adapt_plan(*subject, ds, sac);
        } catch (const ValidationError&) {
            skipped.push_back(sid);
            continue;
        }
        const AdaptOutcome outcome = adapt(base, plan);
        const ImprovementReport cmp = adapt_compare(base, outcome.model, plan.active);

        const double gain = outcome.curve.within_k.back() - outcome.curve.within_k.front();
        gains.push_back(gain);
        curves.push_back(outcome.curve.within_k);
        for (std::size_t b = 0; b < 11; ++b) {
            pooled_base[b] += cmp.hist_base[b];
            pooled_adapted[b] += cmp.hist_adapted[b];
        }
        per_subject.push_back(json{{"subject", sid},
                                   {"curve", outcome.curve.within_k},
                                   {"gain", gain},
                                   {"with_replacement", outcome.sampled_with_replacement},
                                   {"active_windows", plan.active.size()},
                                   {"neutral_windows", plan.neutral.size()}});
    }
    if (gains.empty())
        throw ValidationError("adapt: no validation subject has neutral-span recordings");

    double mean_gain = 0.0;
    for (const double g : gains) mean_gain += g;
    mean_gain /= static_cast<double>(gains.size());

    // Mean curve across adapted subjects (curves share the configured length).
    std::vector<double> mean_curve(curves.front().size(), 0.0);
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.size(); ++i) mean_curve[i] += c[i];
    for (auto& v : mean_curve) v /= static_cast<double>(curves.size());

    const auto out_dir = config.work_dir / "adapt";
    fs::create_directories(out_dir);
    json report{{"k", config.adapt_k},
                {"iterations", config.adapt_iterations},
                {"subjects", per_subject},
                {"skipped_subjects", skipped},
                {"mean_gain", mean_gain},
                {"mean_curve", mean_curve},
                {"pooled_hist_base", pooled_base},
                {"pooled_hist_adapted", pooled_adapted}};
    write_text_file(out_dir / "adapt_report.json", report.dump(2) + "\n");

    std::string csv = "iteration,mean_within_k\n";
    for (std::size_t i = 0; i < mean_curve.size(); ++i)
        csv += std::to_string(i) + "," + format_fixed(mean_curve[i], 6) + "\n";
    write_text_file(out_dir / "adapt_curve.csv", csv);
    write_stamp(out_dir, "adapt", fp_adapt(config));

    return json{{"stage", "adapt"},
                {"adapted_subjects", gains.size()},
                {"skipped_subjects", skipped.size()},
                {"mean_gain", mean_gain}};
}

json run_eval(const PipelineConfig& config) {
    require_stamp(config.work_dir / "model", "train", fp_train(config));
    const SegmentDataset ds = load_dataset(config.work_dir / "augmented");
    const SplitFile split = load_split(config);
    const ScorerModel model = load_checkpoint(config.work_dir / "model" / "model.ckpt");

    SegmentDataset val = filter_by_subjects(ds, split.val_subjects);
    if (!config.eval_include_augmented) {
        SegmentDataset base_only;
        base_only.params = val.params;
        base_only.d = val.d;
        for (std::size_t i = 0; i < val.size(); ++i) {
            if (val.windows[i].augmented) continue;
            base_only.windows.push_back(val.windows[i]);
            base_only.features.push_back(val.features[i]);
        }
        val = std::move(base_only);
    }
    if (val.empty()) throw ValidationError("eval: empty validation set");

    const auto preds = model.predict(val);
    std::vector<int> labels;
    labels.reserve(val.size());
    for (const auto& w : val.windows) labels.push_back(w.label);
    const EvalReport report = evaluate(preds, labels);

    const auto out_dir = config.work_dir / "eval";
    fs::create_directories(out_dir);
    write_text_file(out_dir / "eval_report.json", report.to_json());
    write_text_file(out_dir / "eval_report.csv", report.to_csv());
    write_stamp(out_dir, "eval", fp_eval(config));

    return json{{"stage", "eval"},
                {"windows", report.n},
                {"exact", report.exact},
                {"within_2", report.within[2]},
                {"within_3", report.within[3]}};
}

json run_report(const PipelineConfig& config) {
    require_stamp(config.work_dir / "augmented", "augment", fp_augment(config));
    require_stamp(config.work_dir / "eval", "eval", fp_eval(config));
    require_stamp(config.work_dir / "adapt", "adapt", fp_adapt(config));

    const json balance =
        json::parse(read_text_file(config.work_dir / "augmented" / "balance_report.json"));
    const json eval_doc = json::parse(read_text_file(config.work_dir / "eval" / "eval_report.json"));
    const json adapt_doc = json::parse(read_text_file(config.work_dir / "adapt" / "adapt_report.json"));

    const auto out_dir = config.work_dir / "report";
    fs::create_directories(out_dir);

    std::vector<std::string> classes;
    for (int c = 0; c <= 10; ++c) classes.push_back(std::to_string(c));

    write_text_file(out_dir / "balance.svg",
                    svg_bar_chart("Window count per class before/after augmentation", classes,
                                  {{"before", balance.at("before").get<std::vector<double>>()},
                                   {"after", balance.at("after").get<std::vector<double>>()}}));

    write_text_file(out_dir / "eval_histogram.svg",
                    svg_bar_chart("Label difference histogram (validation)", classes,
                                  {{"|pred-label|", eval_doc.at("histogram").get<std::vector<double>>()}}));

    write_text_file(
        out_dir / "adapt_curve.svg",
        svg_line_chart("Adaptation: mean within-" + std::to_string(config.adapt_k) + " accuracy",
                       "iteration",
                       {{"mean accuracy", adapt_doc.at("mean_curve").get<std::vector<double>>()}}));

    write_text_file(
        out_dir / "adapt_histogram.svg",
        svg_bar_chart("Label difference before/after adaptation", classes,
                      {{"base", adapt_doc.at("pooled_hist_base").get<std::vector<double>>()},
                       {"adapted", adapt_doc.at("pooled_hist_adapted").get<std::vector<double>>()}}));

    write_stamp(out_dir, "report", fp_report(config));
    return json{{"stage", "report"},
                {"report_dir", out_dir.generic_string()},
                {"charts", {"balance.svg", "eval_histogram.svg", "adapt_curve.svg", "adapt_histogram.svg"}}};
}

json run_grad_check(const PipelineConfig& config) {
    ScorerConfig sc = config.scorer;
    if (sc.seed == 0) sc.seed = config.stage_seed("grad-check");
    const ScorerModel model = ScorerModel::init(config.window_t, 4, sc);

    Rng rng(derive_seed(sc.seed, "grad-check-batch"));
    SegmentDataset batch;
    batch.params.t = config.window_t;
    batch.d = 4;
    for (int i = 0; i < 8; ++i) {
        WindowSpec w;
        w.subject_id = "gc";
        w.video_id = "gc";
        w.start = i;
        w.label = static_cast<int>(rng.uniform_int(0, 10));
        std::vector<float> feat(static_cast<std::size_t>(config.window_t) * 4);
        for (auto& v : feat) v = static_cast<float>(rng.uniform());
        batch.windows.push_back(std::move(w));
        batch.features.push_back(std::move(feat));
    }
    const double err = grad_check(model, batch, 1e-5);
    return json{{"stage", "grad-check"}, {"max_relative_error", err}, {"pass", err < 1e-4}};
}

} // namespace pipeline

} // namespace emint
