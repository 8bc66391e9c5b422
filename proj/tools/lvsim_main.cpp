#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lvsim/harness.hpp"

namespace {

void dispatch(const std::string& stage, const lvsim::ExperimentConfig& cfg) {
    if (stage == "gen-workload")
        lvsim::stage_gen_workload(cfg);
    else if (stage == "optimize")
        lvsim::stage_optimize(cfg);
    else if (stage == "build-dataset")
        lvsim::stage_build_dataset(cfg);
    else if (stage == "forecast")
        lvsim::stage_forecast(cfg);
    else if (stage == "simulate")
        lvsim::stage_simulate(cfg);
    else if (stage == "report")
        lvsim::stage_report(cfg);
    else
        lvsim::stage_all(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "lvsim: deterministic two-phase simulator for geo-distributed "
        "livestream transcoding (offline placement optimization, reservation "
        "forecasting, online allocation)"};
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool config_keys = false;
    auto* config_opt =
        app.add_option("--config", config_path, "config file with key = value lines");
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    auto* out_opt = app.add_option("--out", out_dir, "override the output directory");
    app.add_flag("--config-keys", config_keys, "print the config key reference");

    const std::pair<const char*, const char*> stages[] = {
        {"gen-workload", "write catalog, delays, prices and the workload CSV"},
        {"optimize", "solve every slot per delay threshold; write counts and plans"},
        {"build-dataset", "turn instance counts into supervised windows"},
        {"forecast", "fit and select forecasters; write scores and reservations"},
        {"simulate", "run the allocators over the evaluation day and grid"},
        {"report", "aggregate hourly metrics into summary tables"},
        {"all", "run every stage in order"},
    };
    std::string chosen;
    for (const auto& [name, desc] : stages)
        app.add_subcommand(name, desc)->callback([&chosen, n = name] { chosen = n; });
    app.require_subcommand(0, 1);

    CLI11_PARSE(app, argc, argv);

    if (config_keys) {
        std::cout << lvsim::config_reference();
        return 0;
    }
    if (chosen.empty()) {
        std::cerr << "error: missing subcommand (see --help)\n";
        return 2;
    }
    try {
        lvsim::ExperimentConfig cfg;
        if (config_opt->count()) cfg = lvsim::parse_config_file(config_path);
        if (seed_opt->count()) cfg.seed = seed;
        if (out_opt->count()) cfg.out_dir = out_dir;
        cfg.validate();
        dispatch(chosen, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
