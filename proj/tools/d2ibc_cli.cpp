#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "d2ibc/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Data-driven inversion-based control pipeline"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "artifact directory (overrides the config's 'output')");
    app.add_option("--seed", seed, "override the config seed");

    const char* stages[][2] = {
        {"gen", "generate the open-loop identification record"},
        {"identify", "fit the polynomial one-step model"},
        {"design", "build the NIC and tune the PID by virtual reference"},
        {"simulate", "run the configured closed-loop experiments"},
        {"certify", "estimate certificate constants and check bounds"},
        {"report", "write summary.json"},
        {"all", "run every stage in order"},
    };
    for (const auto& s : stages) app.add_subcommand(s[0], s[1]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : d2ibc::kExitConfig;
    }
    const std::string stage = app.get_subcommands().front()->get_name();

    std::optional<d2ibc::Pipeline> pipeline;
    try {
        auto cfg = d2ibc::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.output = out_dir;
        const std::string out = cfg.output;
        pipeline.emplace(std::move(cfg), out);
    } catch (const d2ibc::Error& e) {
        std::cerr << "error [stage config]: " << e.what() << '\n';
        return d2ibc::kExitConfig;
    }
    return pipeline->run(stage);
}
