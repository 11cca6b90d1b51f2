#include "ddc/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Data-driven contraction analysis and controller synthesis"};
    app.require_subcommand(1);

    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool relaxed = false;
    int grid = 0;
    int realizations = 0;

    std::vector<CLI::App*> subs;
    for (const char* name : {"identify", "oslip", "synthesize", "simulate", "verify", "reproduce-uav"}) {
        CLI::App* sub = app.add_subcommand(name);
        if (std::string(name) != "reproduce-uav") sub->add_option("--config", config, "Experiment config (JSON)");
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--seed", seed, "Master seed override");
        sub->add_option("--grid", grid, "Sampling-grid resolution override");
        sub->add_option("--realizations", realizations, "Monte Carlo realization count override");
        if (std::string(name) == "synthesize") sub->add_flag("--relaxed", relaxed, "Minimize mu without a rate target");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ddc::kExitOk : ddc::kExitInvalidConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    ddc::CommandOptions opt;
    opt.out = out;
    opt.relaxed = relaxed;
    if (chosen->count("--seed")) opt.seed = seed;
    if (chosen->count("--grid")) opt.grid = grid;
    if (chosen->count("--realizations")) opt.realizations = realizations;
    std::optional<std::filesystem::path> config_path;
    if (!config.empty()) config_path = config;
    return ddc::run_command(chosen->get_name(), config_path, opt);
}
