#include "emint/au_trace.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "emint/errors.hpp"
#include "emint/num.hpp"

namespace emint {

int AUTrace::channel_index(std::string_view name) const {
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (channels[i] == name) return static_cast<int>(i);
    }
    return -1;
}

AUTrace parse_au_trace(std::string_view text) {
    AUTrace trace;
    bool header_seen = false;
    bool has_valid_col = false;
    std::int64_t prev_frame = -1;

    for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        line = trim(line);
        if (line.empty()) return;
        const auto fields = split_csv(line);

        if (!header_seen) {
            if (fields.size() < 2 || trim(fields[0]) != "frame")
                throw ParseError("expected header 'frame,valid,<channels...>'", lineno, 1);
            std::size_t ch_start = 1;
            if (trim(fields[1]) == "valid") {
                has_valid_col = true;
                ch_start = 2;
            }
            if (fields.size() <= ch_start)
                throw ParseError("header declares no AU channels", lineno, fields.size());
            std::set<std::string_view> seen;
            for (std::size_t i = ch_start; i < fields.size(); ++i) {
                const auto name = trim(fields[i]);
                if (name.empty())
                    throw ParseError("empty channel name", lineno, i + 1);
                if (!seen.insert(name).second)
                    throw ParseError("duplicate channel name '" + std::string(name) + "'", lineno, i + 1);
                trace.channels.emplace_back(name);
            }
            header_seen = true;
            return;
        }

        const std::size_t expected = 1 + (has_valid_col ? 1u : 0u) + trace.channels.size();
        if (fields.size() != expected)
            throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                                 std::to_string(fields.size()),
                             lineno, 1);

        const auto frame = parse_int(trim(fields[0]));
        if (!frame) throw ParseError("non-numeric frame index", lineno, 1);
        if (*frame <= prev_frame)
            throw ParseError("frame index not strictly increasing", lineno, 1);

        bool row_valid = true;
        std::size_t col = 1;
        if (has_valid_col) {
            const auto v = trim(fields[1]);
            if (v == "0") row_valid = false;
            else if (v == "1") row_valid = true;
            else throw ParseError("valid flag must be 0 or 1", lineno, 2);
            col = 2;
        }

        std::vector<double> row(trace.channels.size(), 0.0);
        for (std::size_t i = 0; i < trace.channels.size(); ++i, ++col) {
            const auto v = parse_double(trim(fields[col]));
            if (!v || !std::isfinite(*v))
                throw ParseError("non-numeric cell", lineno, col + 1);
            if (*v < 0.0 || *v > 1.0)
                throw ParseError("AU value " + format_fixed(*v, 6) + " outside [0,1]", lineno, col + 1);
            row[i] = *v;
        }

        // Fill any skipped frame indices with masked placeholder rows.
        for (std::int64_t f = prev_frame + 1; f < *frame; ++f) {
            trace.values.emplace_back(trace.channels.size(), 0.0);
            trace.valid.push_back(0);
        }
        trace.values.push_back(std::move(row));
        trace.valid.push_back(row_valid ? 1 : 0);
        prev_frame = *frame;
    });

    if (!header_seen) throw ParseError("empty document", 1, 1);
    return trace;
}

std::string serialize_au_trace(const AUTrace& trace) {
    std::string out = "frame,valid";
    for (const auto& c : trace.channels) {
        out += ',';
        out += c;
    }
    out += '\n';
    for (std::size_t f = 0; f < trace.values.size(); ++f) {
        out += std::to_string(f);
        out += trace.valid[f] ? ",1" : ",0";
        for (const double v : trace.values[f]) {
            out += ',';
            out += format_fixed(v, 6);
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

AUTrace load_au_trace(const std::filesystem::path& path) {
    try {
        AUTrace t = parse_au_trace(read_text_file(path));
        t.video_id = path.stem().string();
        return t;
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_au_trace(const AUTrace& trace, const std::filesystem::path& path) {
    write_text_file(path, serialize_au_trace(trace));
}

} // namespace emint
