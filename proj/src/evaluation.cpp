#include "emint/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "emint/errors.hpp"
#include "emint/num.hpp"

namespace emint {

using nlohmann::json;

EvalReport evaluate(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw ValidationError("evaluate: " + std::to_string(predictions.size()) + " predictions vs " +
                              std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw ValidationError("evaluate: empty input");

    EvalReport r;
    r.n = static_cast<std::int64_t>(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        const int l = labels[i];
        if (p < 0 || p > 10 || l < 0 || l > 10)
            throw ValidationError("evaluate: class out of range at index " + std::to_string(i));
        const int diff = std::abs(p - l);
        r.histogram[static_cast<std::size_t>(diff)]++;
        r.confusion[static_cast<std::size_t>(l)][static_cast<std::size_t>(p)]++;
    }
    std::int64_t cum = 0;
    for (std::size_t k = 0; k < r.within.size(); ++k) {
        cum += r.histogram[k];
        r.within[k] = static_cast<double>(cum) / static_cast<double>(r.n);
    }
    r.exact = r.within[0];
    return r;
}

std::string EvalReport::to_json() const {
    json doc;
    doc["n"] = n;
    doc["exact"] = exact;
    doc["within"] = within;
    doc["histogram"] = histogram;
    doc["confusion"] = confusion;
    return doc.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
    std::string out = "k,within_k,histogram\n";
    for (std::size_t k = 0; k < within.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_fixed(within[k], 6);
        out += ',';
        out += std::to_string(histogram[k]);
        out += '\n';
    }
    return out;
}

TaskIntensityReport max_intensity_by_task(const DatasetManifest& manifest,
                                          const std::map<std::string, IntensityTrace>& traces) {
    // task -> subject -> max intensity over that subject's recordings of the task
    std::map<std::string, std::map<std::string, double>> maxima;
    for (const auto& subject : manifest.subjects) {
        for (const auto& rec : subject.recordings) {
            const auto it = traces.find(rec.video_id);
            if (it == traces.end())
                throw ValidationError("max_intensity_by_task: no trace for '" + rec.video_id + "'");
            const auto& trace = it->second;
            double mx = 0.0;
            bool any = false;
            for (std::size_t f = 0; f < trace.frame_count(); ++f) {
                if (!trace.valid[f]) continue;
                mx = std::max(mx, trace.intensity[f]);
                any = true;
            }
            if (!any) continue;
            auto& slot = maxima[rec.task_tag];
            const auto sub_it = slot.find(subject.subject_id);
            if (sub_it == slot.end()) slot[subject.subject_id] = mx;
            else sub_it->second = std::max(sub_it->second, mx);
        }
    }

    TaskIntensityReport report;
    for (const auto& [task, by_subject] : maxima) {
        TaskStats stats;
        stats.task = task;
        double sum = 0.0;
        for (const auto& [sid, mx] : by_subject) {
            stats.per_subject_max.push_back(mx);
            sum += mx;
        }
        const double n = static_cast<double>(stats.per_subject_max.size());
        stats.mean = sum / n;
        double var = 0.0;
        for (const double v : stats.per_subject_max) var += (v - stats.mean) * (v - stats.mean);
        stats.sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
        report.groups.push_back(std::move(stats));
    }
    if (report.groups.size() == 2)
        report.mean_difference = std::abs(report.groups[0].mean - report.groups[1].mean);
    return report;
}

std::string TaskIntensityReport::to_json() const {
    json doc;
    doc["groups"] = json::array();
    for (const auto& g : groups) {
        json jg;
        jg["task"] = g.task;
        jg["mean"] = g.mean;
        jg["sd"] = g.sd;
        jg["per_subject_max"] = g.per_subject_max;
        doc["groups"].push_back(std::move(jg));
    }
    doc["mean_difference"] = mean_difference ? json(*mean_difference) : json(nullptr);
    return doc.dump(2) + "\n";
}

} // namespace emint
