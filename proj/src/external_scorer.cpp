#include "emint/external_scorer.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "emint/errors.hpp"

namespace emint {

using nlohmann::json;

ProcessChannel::ProcessChannel(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ValidationError("ProcessChannel: empty argv");
    int in_pipe[2];  // parent -> child
    int out_pipe[2]; // child -> parent
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw IoError("ProcessChannel: pipe() failed");

    const int pid = fork();
    if (pid < 0) throw IoError("ProcessChannel: fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    close(in_pipe[0]);
    close(out_pipe[1]);
}

ProcessChannel::~ProcessChannel() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        if (waitpid(pid_, &status, WNOHANG) == 0) {
            kill(pid_, SIGTERM);
            waitpid(pid_, &status, 0);
        }
    }
}

void ProcessChannel::send_line(std::string_view line) {
    std::string buf(line);
    buf += '\n';
    std::size_t sent = 0;
    while (sent < buf.size()) {
        const auto n = write(to_child_, buf.data() + sent, buf.size() - sent);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("ProcessChannel: write failed");
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> ProcessChannel::recv_line(int timeout_ms) {
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int r = poll(&pfd, 1, timeout_ms);
        if (r == 0) return std::nullopt; // timeout
        if (r < 0) {
            if (errno == EINTR) continue;
            throw IoError("ProcessChannel: poll failed");
        }
        char chunk[4096];
        const auto n = read(from_child_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("ProcessChannel: read failed");
        }
        if (n == 0) {
            // EOF: drain whatever is buffered as a final line.
            if (buffer_.empty()) return std::nullopt;
            std::string line = std::move(buffer_);
            buffer_.clear();
            return line;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<Prediction> score_external(LineChannel& channel, const SegmentDataset& windows,
                                       int timeout_ms) {
    const int t = windows.params.t;
    const int d = windows.d;

    for (std::size_t i = 0; i < windows.size(); ++i) {
        json req;
        req["id"] = i;
        req["t"] = t;
        req["d"] = d;
        json rows = json::array();
        const auto& block = windows.features[i];
        for (int r = 0; r < t; ++r) {
            json row = json::array();
            for (int c = 0; c < d; ++c)
                row.push_back(block[static_cast<std::size_t>(r) * d + c]);
            rows.push_back(std::move(row));
        }
        req["features"] = std::move(rows);
        channel.send_line(req.dump());
    }
    channel.send_line(""); // close the session

    std::map<std::size_t, Prediction> by_id;
    while (by_id.size() < windows.size()) {
        const auto line = channel.recv_line(timeout_ms);
        if (!line) {
            std::string pending;
            for (std::size_t i = 0; i < windows.size(); ++i)
                if (!by_id.count(i)) pending += (pending.empty() ? "" : ",") + std::to_string(i);
            throw ProtocolError("external scorer timed out; pending ids: " + pending);
        }
        if (line->empty()) continue;
        const json resp = json::parse(*line, nullptr, false);
        if (resp.is_discarded() || !resp.is_object() || !resp.contains("id") || !resp.contains("logits"))
            throw ProtocolError("malformed response line: " + *line);
        const auto id = resp.at("id").get<std::size_t>();
        if (id >= windows.size()) throw ProtocolError("response id out of range: " + std::to_string(id));
        if (by_id.count(id)) throw ProtocolError("duplicate response id: " + std::to_string(id));
        const auto& jl = resp.at("logits");
        if (!jl.is_array() || jl.size() != static_cast<std::size_t>(kNumClasses))
            throw ProtocolError("expected " + std::to_string(kNumClasses) + " logits, got " +
                                std::to_string(jl.size()));
        std::array<double, kNumClasses> z{};
        for (std::size_t c = 0; c < z.size(); ++c) z[c] = jl.at(c).get<double>();

        Prediction pred;
        double mx = z[0];
        for (const double v : z) mx = std::max(mx, v);
        double sum = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) {
            pred.probs[c] = std::exp(z[c] - mx);
            sum += pred.probs[c];
        }
        for (auto& p : pred.probs) p /= sum;
        pred.cls = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(pred.cls)]) pred.cls = c;
        by_id.emplace(id, pred);
    }

    std::vector<Prediction> out;
    out.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) out.push_back(by_id.at(i));
    return out;
}

void serve_scorer(std::istream& in, std::ostream& out, const ScorerModel& model) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) break;
        const json req = json::parse(line, nullptr, false);
        if (req.is_discarded()) break;
        const auto id = req.at("id").get<std::size_t>();
        const int t = req.at("t").get<int>();
        const int d = req.at("d").get<int>();
        std::vector<float> window;
        window.reserve(static_cast<std::size_t>(t) * d);
        for (const auto& row : req.at("features"))
            for (const auto& v : row) window.push_back(v.get<float>());

        json resp;
        resp["id"] = id;
        if (t == model.t() && d == model.d()) {
            const auto z = model.logits(window);
            resp["logits"] = z;
        } else {
            resp["logits"] = json::array();
        }
        out << resp.dump() << "\n" << std::flush;
    }
}

} // namespace emint
