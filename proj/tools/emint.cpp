// Pipeline command-line tool: generate, label, segment, augment, split,
// train, adapt, eval, report, grad-check.
#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emint/au_trace.hpp"
#include "emint/errors.hpp"
#include "emint/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

const std::set<std::string> kSubcommands = {"gen",   "label", "segment", "augment",    "split",
                                            "train", "adapt", "eval",    "report",     "grad-check"};

void print_summary(const nlohmann::json& summary, bool as_json) {
    if (as_json) {
        std::cout << summary.dump(2) << "\n";
        return;
    }
    for (const auto& [key, value] : summary.items()) {
        if (key == "stage") continue;
        std::cout << "  " << key << ": "
                  << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    // Unknown subcommands are a usage error (exit 64), distinct from
    // validation failures inside a valid subcommand.
    if (argc >= 2 && argv[1][0] != '-' && !kSubcommands.count(argv[1])) {
        std::cerr << "emint: unknown subcommand '" << argv[1] << "'\n";
        std::cerr << "known subcommands: gen label segment augment split train adapt eval report "
                     "grad-check\n";
        return kExitUsage;
    }

    CLI::App app{"Emotion-intensity pipeline over action-unit traces"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string work_dir_flag;
    std::string corpus_dir_flag;
    std::uint64_t seed_flag = 0;
    bool seed_set = false;
    std::vector<std::string> overrides;
    bool json_output = false;

    app.add_option("--config", config_path, "Pipeline config JSON file");
    app.add_option("--work-dir", work_dir_flag, "Override paths.work_dir");
    app.add_option("--corpus-dir", corpus_dir_flag, "Override paths.corpus_dir");
    app.add_option("--seed", seed_flag, "Override the master seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--set", overrides, "Dotted config override key=value (repeatable)");
    app.add_flag("--json", json_output, "Machine-readable JSON output");

    std::string stage_name;
    for (const auto& name : kSubcommands) {
        auto* sub = app.add_subcommand(name);
        sub->callback([&stage_name, name]() { stage_name = name; });
    }

    CLI11_PARSE(app, argc, argv);

    if (stage_name.empty()) {
        std::cout << app.help() << "\n";
        return kExitOk;
    }

    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            doc = nlohmann::json::parse(emint::read_text_file(config_path), nullptr, false);
            if (doc.is_discarded())
                throw emint::ParseError("config is not valid JSON: " + config_path);
        }
        for (const auto& kv : overrides) emint::PipelineConfig::apply_override(doc, kv);
        if (!work_dir_flag.empty()) doc["paths"]["work_dir"] = work_dir_flag;
        if (!corpus_dir_flag.empty()) doc["paths"]["corpus_dir"] = corpus_dir_flag;
        if (seed_set) doc["seed"] = seed_flag;

        const emint::PipelineConfig config = emint::PipelineConfig::from_json(doc);

        nlohmann::json summary;
        using namespace emint::pipeline;
        if (stage_name == "gen") summary = run_gen(config);
        else if (stage_name == "label") summary = run_label(config);
        else if (stage_name == "segment") summary = run_segment(config);
        else if (stage_name == "augment") summary = run_augment(config);
        else if (stage_name == "split") summary = run_split(config);
        else if (stage_name == "train") summary = run_train(config);
        else if (stage_name == "adapt") summary = run_adapt(config);
        else if (stage_name == "eval") summary = run_eval(config);
        else if (stage_name == "report") summary = run_report(config);
        else if (stage_name == "grad-check") summary = run_grad_check(config);

        if (!json_output) std::cout << stage_name << ":\n";
        print_summary(summary, json_output);
        if (stage_name == "grad-check" && !summary.at("pass").get<bool>()) return kExitValidation;
        return kExitOk;
    } catch (const emint::IoError& e) {
        std::cerr << "emint: I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const emint::Error& e) {
        std::cerr << "emint: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "emint: " << e.what() << "\n";
        return kExitValidation;
    }
}
