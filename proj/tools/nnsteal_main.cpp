// nnsteal: black-box depth extraction via timing side channels, with
// RL-based substitute reconstruction and the two mitigations.
//
//   nnsteal setup       --config cfg.json        build attacker artifacts
//   nnsteal attack      --config cfg.json        infer target depth from time
//   nnsteal reconstruct --config cfg.json        search + distill a substitute
//   nnsteal defend      --config cfg.json        dummy-layer / poisoning runs
//   nnsteal report      --config cfg.json        print (and verify) the report

#include <iostream>

#include <CLI11.hpp>

#include "nnsteal/pipeline.hpp"

using nnsteal::cli::Overrides;
using nnsteal::cli::PipelineConfig;

int main(int argc, char** argv) {
    CLI::App app{"timing side-channel model extraction toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    uint64_t seed = 0;
    std::string timing_mode, regressors, out_dir, defend_mode;
    int n_runs = 0, depth = 0, defend_k = -1;
    double defend_fraction = -1.0;
    bool literal_reward = false, verify = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (JSON)")->required();
        cmd->add_option("--seed", seed, "override the top-level seed");
        cmd->add_option("--timing-mode", timing_mode, "wall | cost-model");
        cmd->add_option("--n-runs", n_runs, "queries per timing measurement");
        cmd->add_option("--out", out_dir, "artifact directory");
    };

    auto* setup = app.add_subcommand("setup", "build timing dataset and reconstruction set");
    add_common(setup);

    auto* attack = app.add_subcommand("attack", "infer the target depth from execution time");
    add_common(attack);
    attack->add_option("--regressor", regressors, "comma-separated regressor kinds");

    auto* reconstruct = app.add_subcommand("reconstruct", "architecture search + distillation");
    add_common(reconstruct);
    reconstruct->add_option("--depth", depth, "override the inferred depth");
    reconstruct->add_flag("--literal-reward", literal_reward,
                          "clip the cubed reward itself instead of the advantage");

    auto* defend = app.add_subcommand("defend", "rerun the attack under a mitigation");
    add_common(defend);
    defend->add_option("--mode", defend_mode, "dummy-layers | poison");
    defend->add_option("--k", defend_k, "dummy layers to add");
    defend->add_option("--fraction", defend_fraction, "poisoned fraction");
    defend->add_option("--regressor", regressors, "comma-separated regressor kinds");

    auto* report = app.add_subcommand("report", "print the extraction report");
    add_common(report);
    report->add_flag("--verify", verify, "recompute metrics from persisted models");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.count_all() > 1) {
            if (seed != 0) ov.seed = seed;
            if (!timing_mode.empty()) ov.timing_mode = timing_mode;
            if (!regressors.empty()) ov.regressors = regressors;
            if (n_runs > 0) ov.n_runs = n_runs;
            if (!out_dir.empty()) ov.out_dir = out_dir;
            if (depth > 0) ov.depth = depth;
            if (literal_reward) ov.literal_reward = true;
        }
        PipelineConfig cfg = nnsteal::cli::load_config(config_path, ov);
        if (defend->parsed()) {
            if (!defend_mode.empty()) cfg.defend_mode = defend_mode;
            if (defend_k >= 0) cfg.defend_k = defend_k;
            if (defend_fraction >= 0.0) cfg.defend_fraction = defend_fraction;
        }

        if (setup->parsed()) nnsteal::cli::run_setup(cfg);
        if (attack->parsed()) nnsteal::cli::run_attack(cfg);
        if (reconstruct->parsed()) nnsteal::cli::run_reconstruct(cfg);
        if (defend->parsed()) nnsteal::cli::run_defend(cfg);
        if (report->parsed()) nnsteal::cli::run_report(cfg, verify);
        return nnsteal::cli::kOk;
    } catch (const nnsteal::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return nnsteal::cli::kConfigError;
    } catch (const nnsteal::cli::PhaseError& e) {
        std::cerr << "phase failed: " << e.what() << "\n";
        return nnsteal::cli::kPhaseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nnsteal::cli::kPhaseError;
    }
}
