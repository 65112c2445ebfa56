// Line protocol for out-of-process scorers (the backbone seam).
//
// Request, one JSON object per line:
//   {"id": int, "t": int, "d": int, "features": [[f32,...],...]}
// Response, one per line, any order (matched by id):
//   {"id": int, "logits": [11 floats]}
// A blank line closes the session.
#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emint/scorer.hpp"
#include "emint/segmentation.hpp"

namespace emint {

class LineChannel {
public:
    virtual ~LineChannel() = default;
    virtual void send_line(std::string_view line) = 0;
    // nullopt on timeout; empty string is a blank line.
    virtual std::optional<std::string> recv_line(int timeout_ms) = 0;
};

// Spawns `argv` with stdin/stdout piped; closes and reaps on destruction.
class ProcessChannel : public LineChannel {
public:
    explicit ProcessChannel(const std::vector<std::string>& argv);
    ~ProcessChannel() override;

    ProcessChannel(const ProcessChannel&) = delete;
    ProcessChannel& operator=(const ProcessChannel&) = delete;

    void send_line(std::string_view line) override;
    std::optional<std::string> recv_line(int timeout_ms) override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

// One prediction per window, order preserved. Throws ProtocolError on a
// malformed response, wrong logit count, unknown/duplicate id, or timeout.
std::vector<Prediction> score_external(LineChannel& channel, const SegmentDataset& windows,
                                       int timeout_ms = 10000);

// Serve the protocol over text streams using the reference model
// (the stub tool's core; also handy for loopback tests).
void serve_scorer(std::istream& in, std::ostream& out, const ScorerModel& model);

} // namespace emint
