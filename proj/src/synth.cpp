#include "emint/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "emint/errors.hpp"
#include "emint/num.hpp"
#include "emint/rng.hpp"

namespace emint {

int CorpusConfig::batch_of(int subject_index) const {
    switch (batch_pattern) {
        case BatchPattern::alternate: return subject_index % 2 == 0 ? 1 : 2;
        case BatchPattern::batch1_first: return subject_index < batch_split_index ? 1 : 2;
        case BatchPattern::batch2_first: return subject_index < batch_split_index ? 2 : 1;
    }
    return 1;
}

CorpusConfig CorpusConfig::defaults() { return CorpusConfig{}; }

CorpusConfig CorpusConfig::exact_labeling() {
    CorpusConfig c;
    c.noise_sd = 0.0;
    c.invalid_fraction = 0.0;
    c.baseline_max = 0.0;
    c.speed_min = c.speed_max = 16;
    c.smile_peak_jitter = 0.0;
    c.plateau_levels = {{{0.32, 0.0}, {0.64, 0.0}, {1.0, 0.0}}};
    return c;
}

CorpusConfig CorpusConfig::paper_counts() {
    CorpusConfig c;
    c.n_subjects = 41;
    c.fps = 60.0;
    c.invalid_fraction = 0.0;
    c.batch_pattern = BatchPattern::batch2_first;
    c.batch_split_index = 29; // 29 plateau subjects for training, 12 pulse for validation
    c.paper_sizing = true;
    return c;
}

CorpusConfig CorpusConfig::adaptation_study() {
    CorpusConfig c;
    c.n_subjects = 21;
    c.batch_pattern = BatchPattern::batch1_first;
    c.batch_split_index = 7;
    c.write_embeddings = true;
    return c;
}

namespace {

double raised_cosine(double u) { return 0.5 - 0.5 * std::cos(3.14159265358979323846 * u); }

double curve_value(const TaskScript& script, int speed, int t) {
    if (script.kind == TaskScript::Kind::pulse) {
        const int peak_frame = script.length_frames / 2;
        const int onset = peak_frame - speed;
        const int offset_end = peak_frame + speed;
        if (t < onset || t > offset_end) return 0.0;
        if (t <= peak_frame)
            return script.peak_or_level * raised_cosine(static_cast<double>(t - onset) / speed);
        return script.peak_or_level * raised_cosine(static_cast<double>(offset_end - t) / speed);
    }
    if (t < script.lead_frames) return 0.0;
    if (t < script.lead_frames + speed)
        return script.peak_or_level * raised_cosine(static_cast<double>(t - script.lead_frames) / speed);
    return script.peak_or_level;
}

} // namespace

SubjectProfile gen_subject(const CorpusConfig& config, int subject_index) {
    Rng rng(derive_seed(config.seed, "subject", static_cast<std::uint64_t>(subject_index)));
    SubjectProfile p;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", subject_index);
    p.subject_id = buf;
    p.au_max["AU6L"] = quantize6(rng.uniform(0.4, 0.6));
    p.au_max["AU6R"] = quantize6(rng.uniform(0.4, 0.6));
    p.au_max["AU12L"] = quantize6(rng.uniform(0.5, 0.8));
    p.au_max["AU12R"] = quantize6(rng.uniform(0.5, 0.8));
    for (const auto& c : kAUChannels)
        p.baseline[c] = config.baseline_max > 0.0 ? quantize6(rng.uniform(0.0, config.baseline_max)) : 0.0;
    p.expressivity_speed = static_cast<int>(rng.uniform_int(config.speed_min, config.speed_max));
    p.noise_sd = config.noise_sd;
    return p;
}

GeneratedRecording gen_recording(const SubjectProfile& profile, const TaskScript& script,
                                 std::uint64_t rec_seed, const CorpusConfig& config,
                                 const std::array<double, 16>* embed_mix_matrix,
                                 const std::array<double, 4>* embed_offset) {
    Rng rng(rec_seed);
    GeneratedRecording out;
    out.trace.subject_id = profile.subject_id;
    out.trace.fps = script.fps;
    out.trace.channels = kAUChannels;

    const int n = script.length_frames;
    out.ground_truth.resize(static_cast<std::size_t>(n));
    out.trace.values.resize(static_cast<std::size_t>(n));
    out.trace.valid.assign(static_cast<std::size_t>(n), 1);

    for (int t = 0; t < n; ++t) {
        const double g = curve_value(script, profile.expressivity_speed, t);
        out.ground_truth[static_cast<std::size_t>(t)] = quantize6(g);
        auto& row = out.trace.values[static_cast<std::size_t>(t)];
        row.resize(kAUChannels.size());
        for (std::size_t c = 0; c < kAUChannels.size(); ++c) {
            const double base = profile.baseline.at(kAUChannels[c]);
            const double mx = profile.au_max.at(kAUChannels[c]);
            double v = base + g * (mx - base);
            if (profile.noise_sd > 0.0) v += rng.normal(0.0, profile.noise_sd);
            row[c] = quantize6(std::clamp(v, 0.0, 1.0));
        }
    }
    if (config.invalid_fraction > 0.0) {
        for (int t = 0; t < n; ++t)
            if (rng.bernoulli(config.invalid_fraction)) out.trace.valid[static_cast<std::size_t>(t)] = 0;
    }

    if (embed_mix_matrix && embed_offset) {
        FeatureMatrix fm;
        fm.rows = static_cast<std::uint32_t>(n);
        fm.cols = 4;
        fm.data.reserve(static_cast<std::size_t>(n) * 4);
        for (int t = 0; t < n; ++t) {
            const auto& row = out.trace.values[static_cast<std::size_t>(t)];
            for (int i = 0; i < 4; ++i) {
                double acc = (*embed_offset)[static_cast<std::size_t>(i)];
                for (int j = 0; j < 4; ++j)
                    acc += (*embed_mix_matrix)[static_cast<std::size_t>(i) * 4 + j] *
                           row[static_cast<std::size_t>(j)];
                fm.data.push_back(static_cast<float>(std::clamp(acc, 0.0, 2.0)));
            }
        }
        out.embedding = std::move(fm);
    }
    return out;
}

namespace {

struct PaperSizing {
    // Window arithmetic at T=16, stride 6:
    //   batch 2: 72 videos of 258 frames (41 windows) + 15 of 252 (40) = 3552
    //   batch 1:  6 videos of 516 frames (84 windows) + 18 of 510 (83) = 1998
    int batch1_count = 0;
    int batch2_count = 0;

    int next_length(int batch) {
        if (batch == 2) return batch2_count++ < 72 ? 258 : 252;
        return batch1_count++ < 6 ? 516 : 510;
    }
};

} // namespace

DatasetManifest gen_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "traces");
    fs::create_directories(out_dir / "truth");
    if (config.write_embeddings) fs::create_directories(out_dir / "features");

    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    PaperSizing sizing;

    for (int s = 0; s < config.n_subjects; ++s) {
        const SubjectProfile profile = gen_subject(config, s);
        const int batch = config.batch_of(s);
        const std::uint64_t subject_seed = derive_seed(config.seed, "subject", static_cast<std::uint64_t>(s));

        std::array<double, 16> mix{};
        std::array<double, 4> offset{};
        if (config.write_embeddings) {
            Rng erng(derive_seed(config.seed, "embed", static_cast<std::uint64_t>(s)));
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    mix[static_cast<std::size_t>(i) * 4 + j] =
                        (i == j ? 1.0 : 0.0) + erng.uniform(-config.embed_mix, config.embed_mix);
            const double lo = batch == 1 ? config.embed_offset_batch1_lo : config.embed_offset_batch2_lo;
            const double hi = batch == 1 ? config.embed_offset_batch1_hi : config.embed_offset_batch2_hi;
            for (auto& o : offset) o = erng.uniform(lo, hi);
        }

        SubjectEntry subject;
        subject.subject_id = profile.subject_id;

        std::vector<TaskScript> scripts;
        if (batch == 1) {
            Rng jrng(derive_seed(subject_seed, "task_jitter"));
            double smile_peak = config.smile_peak;
            if (config.smile_peak_jitter > 0.0)
                smile_peak += jrng.uniform(-config.smile_peak_jitter, config.smile_peak_jitter);
            TaskScript smile{TaskScript::Kind::pulse, smile_peak, config.pulse_frames, config.fps, 0, "smile"};
            TaskScript really{TaskScript::Kind::pulse, 1.0, config.pulse_frames, config.fps, 0, "really_smile"};
            if (config.paper_sizing) {
                smile.length_frames = sizing.next_length(1);
                really.length_frames = sizing.next_length(1);
            }
            scripts = {smile, really};
        } else {
            Rng jrng(derive_seed(subject_seed, "task_jitter"));
            const std::array<std::string, 3> tags = {"intensity_low", "intensity_mid", "intensity_full"};
            for (std::size_t k = 0; k < 3; ++k) {
                double level = config.plateau_levels[k].level;
                if (config.plateau_levels[k].jitter > 0.0)
                    level += jrng.uniform(-config.plateau_levels[k].jitter, config.plateau_levels[k].jitter);
                level = std::clamp(level, 0.05, 1.0);
                TaskScript script{TaskScript::Kind::plateau, level, config.plateau_frames,
                                  config.fps, config.plateau_lead, tags[k]};
                if (config.paper_sizing) script.length_frames = sizing.next_length(2);
                scripts.push_back(script);
            }
        }

        for (std::size_t k = 0; k < scripts.size(); ++k) {
            const auto& script = scripts[k];
            const std::uint64_t rec_seed = derive_seed(subject_seed, "rec", k);
            GeneratedRecording rec =
                gen_recording(profile, script, rec_seed, config,
                              config.write_embeddings ? &mix : nullptr,
                              config.write_embeddings ? &offset : nullptr);

            const std::string video_id = profile.subject_id + "_v" + std::to_string(k);
            rec.trace.video_id = video_id;

            const auto trace_path = out_dir / "traces" / (video_id + ".csv");
            save_au_trace(rec.trace, trace_path);

            std::string gt = "frame,g\n";
            for (std::size_t f = 0; f < rec.ground_truth.size(); ++f) {
                gt += std::to_string(f);
                gt += ',';
                gt += format_fixed(rec.ground_truth[f], 6);
                gt += '\n';
            }
            write_text_file(out_dir / "truth" / (video_id + ".csv"), gt);

            RecordingEntry entry;
            entry.video_id = video_id;
            entry.trace_path = trace_path;
            entry.task_tag = script.task_tag;
            entry.batch = batch;
            if (script.kind == TaskScript::Kind::pulse) {
                const std::int64_t onset = script.length_frames / 2 - profile.expressivity_speed;
                if (onset > 0) entry.neutral_span = FrameSpan{0, onset};
            }
            if (rec.embedding) {
                const auto feat_path = out_dir / "features" / (video_id + ".bin");
                write_feature_matrix(*rec.embedding, feat_path);
                entry.features_path = feat_path;
            }
            subject.recordings.push_back(std::move(entry));
        }
        manifest.subjects.push_back(std::move(subject));
    }

    save_manifest(manifest, out_dir / "manifest.json");

    nlohmann::json meta;
    meta["seed"] = config.seed;
    meta["n_subjects"] = config.n_subjects;
    meta["fps"] = config.fps;
    meta["noise_sd"] = config.noise_sd;
    meta["invalid_fraction"] = config.invalid_fraction;
    meta["embeddings"] = config.write_embeddings;
    write_text_file(out_dir / "corpus_meta.json", meta.dump(2) + "\n");
    return manifest;
}

} // namespace emint
