#include "emint/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "emint/errors.hpp"
#include "emint/num.hpp"

namespace emint {

using nlohmann::json;

EmotionAUMap EmotionAUMap::happiness() {
    return EmotionAUMap{"happiness", {{"AU6L", "AU6R"}, {"AU12L", "AU12R"}}};
}

std::vector<std::string> EmotionAUMap::all_channels() const {
    std::vector<std::string> out;
    for (const auto& group : terms)
        for (const auto& c : group) out.push_back(c);
    return out;
}

void EmotionAUMap::validate() const {
    if (terms.empty()) throw ValidationError("emotion map '" + emotion + "' has no term groups");
    std::set<std::string> seen;
    for (const auto& group : terms) {
        if (group.empty()) throw ValidationError("emotion map '" + emotion + "' has an empty term group");
        for (const auto& c : group) {
            if (!seen.insert(c).second)
                throw ValidationError("channel '" + c + "' appears in two term groups");
        }
    }
}

EmotionAUMap parse_emotion_map(std::string_view json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("emotion map is not valid JSON");
    if (!doc.is_object() || !doc.contains("emotion") || !doc.contains("terms"))
        throw ValidationError("emotion map requires 'emotion' and 'terms'");
    EmotionAUMap map;
    map.emotion = doc.at("emotion").get<std::string>();
    for (const auto& jg : doc.at("terms")) {
        if (!jg.is_array()) throw ValidationError("each term group must be an array of channel names");
        std::vector<std::string> group;
        for (const auto& c : jg) group.push_back(c.get<std::string>());
        map.terms.push_back(std::move(group));
    }
    map.validate();
    return map;
}

std::string serialize_emotion_map(const EmotionAUMap& map) {
    json doc;
    doc["emotion"] = map.emotion;
    doc["terms"] = map.terms;
    return doc.dump(2) + "\n";
}

AUMaxima subject_au_maxima(std::span<const AUTrace> traces, const EmotionAUMap& map) {
    map.validate();
    if (traces.empty()) throw ValidationError("subject_au_maxima: no recordings given");

    const auto channels = map.all_channels();
    AUMaxima maxima;
    maxima.subject_id = traces.front().subject_id;
    for (const auto& c : channels) maxima.channel_max[c] = 0.0;

    bool any_valid = false;
    for (const auto& trace : traces) {
        std::vector<int> idx(channels.size());
        for (std::size_t i = 0; i < channels.size(); ++i) {
            idx[i] = trace.channel_index(channels[i]);
            if (idx[i] < 0)
                throw ValidationError("recording '" + trace.video_id + "' is missing channel '" +
                                      channels[i] + "'");
        }
        for (std::size_t f = 0; f < trace.frame_count(); ++f) {
            if (!trace.valid[f]) continue;
            any_valid = true;
            for (std::size_t i = 0; i < channels.size(); ++i) {
                auto& m = maxima.channel_max[channels[i]];
                m = std::max(m, trace.values[f][static_cast<std::size_t>(idx[i])]);
            }
        }
    }
    if (!any_valid)
        throw ValidationError("subject '" + maxima.subject_id + "' has no valid frames");
    for (const auto& [c, m] : maxima.channel_max) {
        if (m < kDegenerateMaxEpsilon)
            throw ValidationError("degenerate subject '" + maxima.subject_id + "': channel '" + c +
                                  "' max " + format_fixed(m, 6) + " below " +
                                  format_fixed(kDegenerateMaxEpsilon, 6));
    }
    return maxima;
}

int quantize_intensity(double x) {
    if (std::isnan(x)) throw ValidationError("quantize_intensity: NaN input");
    const double c = std::clamp(x, 0.0, 1.0);
    return static_cast<int>(std::floor(10.0 * c + 0.5)); // half away from zero; 10c >= 0
}

IntensityTrace normalize_emotion_intensity(const AUTrace& trace, const AUMaxima& maxima,
                                           const EmotionAUMap& map) {
    map.validate();

    // Resolve channel columns and group denominators up front.
    std::vector<std::vector<int>> group_cols;
    std::vector<double> group_den;
    for (const auto& group : map.terms) {
        std::vector<int> cols;
        double den = 0.0;
        for (const auto& c : group) {
            const int idx = trace.channel_index(c);
            if (idx < 0)
                throw ValidationError("recording '" + trace.video_id + "' is missing channel '" + c + "'");
            const auto it = maxima.channel_max.find(c);
            if (it == maxima.channel_max.end())
                throw ValidationError("maxima for subject '" + maxima.subject_id +
                                      "' do not cover channel '" + c + "'");
            if (it->second < kDegenerateMaxEpsilon)
                throw ValidationError("degenerate maxima for channel '" + c + "'");
            cols.push_back(idx);
            den += it->second;
        }
        group_cols.push_back(std::move(cols));
        group_den.push_back(den);
    }

    IntensityTrace out;
    out.subject_id = trace.subject_id;
    out.video_id = trace.video_id;
    out.valid = trace.valid;
    out.intensity.resize(trace.frame_count(), 0.0);
    out.label.resize(trace.frame_count(), 0);

    const double n_groups = static_cast<double>(map.terms.size());
    for (std::size_t f = 0; f < trace.frame_count(); ++f) {
        double acc = 0.0;
        for (std::size_t g = 0; g < group_cols.size(); ++g) {
            double num = 0.0;
            for (const int col : group_cols[g]) num += trace.values[f][static_cast<std::size_t>(col)];
            acc += num / group_den[g];
        }
        const double intensity = std::clamp(acc / n_groups, 0.0, 1.0);
        out.intensity[f] = intensity;
        out.label[f] = quantize_intensity(intensity);
    }
    return out;
}

std::string serialize_intensity_trace(const IntensityTrace& trace) {
    std::string out = "frame,valid,intensity,label\n";
    for (std::size_t f = 0; f < trace.frame_count(); ++f) {
        out += std::to_string(f);
        out += trace.valid[f] ? ",1," : ",0,";
        out += format_fixed(trace.intensity[f], 6);
        out += ',';
        out += std::to_string(trace.label[f]);
        out += '\n';
    }
    return out;
}

IntensityTrace parse_intensity_trace(std::string_view text) {
    IntensityTrace trace;
    bool header_seen = false;
    for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        line = trim(line);
        if (line.empty()) return;
        const auto fields = split_csv(line);
        if (!header_seen) {
            if (fields.size() != 4 || trim(fields[0]) != "frame")
                throw ParseError("expected header 'frame,valid,intensity,label'", lineno, 1);
            header_seen = true;
            return;
        }
        if (fields.size() != 4) throw ParseError("expected 4 fields", lineno, 1);
        const auto valid = parse_int(trim(fields[1]));
        const auto intensity = parse_double(trim(fields[2]));
        const auto label = parse_int(trim(fields[3]));
        if (!valid || !intensity || !label) throw ParseError("non-numeric cell", lineno, 2);
        trace.valid.push_back(*valid ? 1 : 0);
        trace.intensity.push_back(*intensity);
        trace.label.push_back(static_cast<int>(*label));
    });
    if (!header_seen) throw ParseError("empty document", 1, 1);
    return trace;
}

} // namespace emint
