// potts <task> --config path [--seed n] [--out dir]
//
// Exit codes: 0 ok, 1 verification check failed, 2 usage/config error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "potts/config.hpp"
#include "potts/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"inhomogeneous Potts spin glass / Max kappa-cut toolkit"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir;
    uint64_t seed = 0;
    bool seed_set = false, out_set = false;

    const std::vector<std::string> tasks = {"sample-graph", "maxcut",      "free-energy",
                                            "groundstate",  "parisi-eval", "parisi-min",
                                            "predict",      "verify",      "compare"};
    std::vector<CLI::App*> subs;
    for (const auto& t : tasks) {
        CLI::App* sub = app.add_subcommand(t);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_dir, "output directory")
            ->each([&](const std::string&) { out_set = true; });
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string task;
    for (size_t i = 0; i < tasks.size(); ++i)
        if (subs[i]->parsed()) task = tasks[i];
    if (task.empty()) {
        std::fprintf(stderr, "usage: potts <task> --config path [--seed n] [--out dir]\n");
        return 2;
    }

    try {
        potts::ExperimentConfig cfg = potts::load_config(config_path);
        if (cfg.task != task)
            throw potts::config_invalid("config task '" + cfg.task +
                                        "' does not match subcommand '" + task + "'");
        if (seed_set) {
            cfg.seed = seed;
            cfg.raw["seed"] = seed;
        }
        if (out_set) cfg.out_dir = out_dir;
        potts::RunReport report = potts::run_experiment(cfg);
        return report.exit_code;
    } catch (const potts::config_invalid& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const potts::suite_unknown& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "task failed: %s\n", e.what());
        return 1;
    }
}
