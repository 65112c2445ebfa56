// Reference implementation of the external-scorer line protocol.
//
// Modes:
//   --checkpoint PATH   serve a saved reference model
//   --fixed-logits CSV  reply with the same logits for every request
//   --logit-count N     with --fixed-logits: emit N logits (protocol tests)
//   --delay-ms N        sleep before each response (timeout tests)
#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emint/external_scorer.hpp"
#include "emint/num.hpp"
#include "emint/scorer.hpp"

int main(int argc, char** argv) {
    CLI::App app{"External-scorer protocol stub"};
    std::string checkpoint;
    std::string fixed_logits;
    int logit_count = emint::kNumClasses;
    int delay_ms = 0;
    app.add_option("--checkpoint", checkpoint, "Serve this model checkpoint");
    app.add_option("--fixed-logits", fixed_logits, "Comma-separated logits echoed for every id");
    app.add_option("--logit-count", logit_count, "Number of logits to emit in fixed mode");
    app.add_option("--delay-ms", delay_ms, "Delay before each response");
    CLI11_PARSE(app, argc, argv);

    if (!checkpoint.empty()) {
        const emint::ScorerModel model = emint::load_checkpoint(checkpoint);
        emint::serve_scorer(std::cin, std::cout, model);
        return 0;
    }

    std::vector<double> logits;
    for (const auto field : emint::split_csv(fixed_logits)) {
        if (const auto v = emint::parse_double(emint::trim(field))) logits.push_back(*v);
    }
    if (logits.empty()) {
        std::cerr << "stub: need --checkpoint or --fixed-logits\n";
        return 2;
    }
    logits.resize(static_cast<std::size_t>(logit_count), 0.0);

    std::string line;
    while (std::getline(std::cin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) break;
        const auto req = nlohmann::json::parse(line, nullptr, false);
        if (req.is_discarded()) break;
        if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        nlohmann::json resp;
        resp["id"] = req.at("id");
        resp["logits"] = logits;
        std::cout << resp.dump() << "\n" << std::flush;
    }
    return 0;
}
