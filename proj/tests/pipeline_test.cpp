#include <doctest.h>

#include <fstream>

#include "nnsteal/pipeline.hpp"

using namespace nnsteal;
using namespace nnsteal::cli;

namespace {

nlohmann::json tiny_config(const std::string& out_dir) {
    return nlohmann::json{
        {"seed", 3},
        {"out_dir", out_dir},
        {"data",
         {{"source", "synthetic-blobs"},
          {"height", 8},
          {"width", 8},
          {"channels", 3},
          {"num_classes", 4},
          {"train", 80},
          {"test", 40},
          {"noise", 0.1},
          {"seed", 12}}},
        {"target",
         {{"arch", {{"preset", "fixed-width"}, {"depth", 3}, {"filters", 6}, {"kernel", 3}}},
          {"train", {{"epochs", 30}, {"lr", 0.25}, {"batch", 8}}}}},
        {"timing",
         {{"mode", "cost-model"},
          {"n_runs", 20},
          {"cost_model",
           {{"alpha", 1e-9}, {"beta", 1e-5}, {"gamma", 1e-10}, {"noise_sigma", 0.03},
            {"seed", 5}, {"id", "cm-test"}}}}},
        {"space",
         {{"depth_range", {1, 6}},
          {"kernel_choices", {3, 5}},
          {"filter_choices", {4, 8}},
          {"n_archs", 40}}},
        {"recon", {{"pool_size", 150}, {"threshold", 0.9}}},
        {"regressor", {{"kinds", {"random-forest"}}, {"features", "time+params"}}},
        {"search",
         {{"num_candidates", 3},
          {"epochs_per_candidate", 5},
          {"kernel_choices", {3, 5}},
          {"filter_choices", {4, 8}},
          {"candidate_lr", 0.25}}},
    };
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config: parsing, fingerprint, overrides") {
    auto j = tiny_config("outx");
    auto cfg = config_from_json(j);
    CHECK(cfg.seed == 3);
    CHECK(cfg.n_runs == 20);
    CHECK(cfg.space.depth_min == 1);
    CHECK(cfg.space.depth_max == 6);
    CHECK(cfg.regressor_kinds.size() == 1);
    CHECK(cfg.search.num_candidates == 3);
    CHECK(cfg.blobs.num_classes == 4);

    auto same = config_from_json(j);
    CHECK(cfg.fingerprint == same.fingerprint);

    Overrides ov;
    ov.seed = 99;
    auto changed = config_from_json(j, ov);
    CHECK(changed.seed == 99);
    CHECK(changed.fingerprint != cfg.fingerprint);

    Overrides ov2;
    ov2.regressors = "ridge,boosted-trees";
    auto two = config_from_json(j, ov2);
    REQUIRE(two.regressor_kinds.size() == 2);
    CHECK(two.regressor_kinds[0] == regress::RegressorKind::Ridge);
    CHECK(two.regressor_kinds[1] == regress::RegressorKind::BoostedTrees);
}

TEST_CASE("pipeline: setup -> attack -> reconstruct -> report on a tiny run") {
    TempDir dir("nnsteal_pipe_test");
    auto cfg = config_from_json(tiny_config(dir.path.string()));

    // attack before setup: input error
    CHECK_THROWS_AS(run_attack(cfg), ConfigError);

    run_setup(cfg);
    CHECK(std::filesystem::exists(timing_csv_path(cfg)));
    CHECK(std::filesystem::exists(target_model_path(cfg)));
    CHECK(std::filesystem::exists(recon_data_path(cfg)));

    auto ds = attack::read_timing_csv(timing_csv_path(cfg));
    CHECK(ds.samples.size() == 40);

    run_attack(cfg);
    CHECK(std::filesystem::exists(attack_json_path(cfg)));
    {
        std::ifstream in(attack_json_path(cfg));
        nlohmann::json aj;
        in >> aj;
        CHECK(aj.at("n_queries").get<int>() == 20);
        CHECK(aj.at("inferred_depth").get<int>() >= 1);
        CHECK(aj.at("true_depth").get<int>() == 3);
    }

    run_reconstruct(cfg);
    CHECK(std::filesystem::exists(report_json_path(cfg)));
    CHECK(std::filesystem::exists(search_log_path(cfg)));
    CHECK(std::filesystem::exists(substitute_model_path(cfg)));
    {
        std::ifstream in(report_json_path(cfg));
        nlohmann::json rj;
        in >> rj;
        const double gap = rj.at("accuracy_gap").get<double>();
        const double target_acc = rj.at("target_test_acc").get<double>();
        const double sub_acc = rj.at("substitute_test_acc").get<double>();
        CHECK(gap == std::abs(target_acc - sub_acc));
        CHECK(target_acc >= 0.0);
        CHECK(target_acc <= 1.0);
        CHECK(rj.at("agreement").get<double>() >= 0.0);
        CHECK(rj.at("agreement").get<double>() <= 1.0);
        CHECK(rj.at("config_fingerprint").get<std::string>() == cfg.fingerprint);
    }

    // report --verify recomputes the metrics from the persisted models
    run_report(cfg, /*verify=*/true);
}

TEST_CASE("pipeline: reruns are byte-identical") {
    TempDir dir("nnsteal_pipe_repro");
    auto cfg = config_from_json(tiny_config(dir.path.string()));

    run_setup(cfg);
    run_attack(cfg);
    run_reconstruct(cfg);
    const std::string timing1 = slurp(timing_csv_path(cfg));
    const std::string attack1 = slurp(attack_json_path(cfg));
    const std::string report1 = slurp(report_json_path(cfg));
    const std::string log1 = slurp(search_log_path(cfg));
    const std::string sub1 = slurp(substitute_model_path(cfg));

    run_setup(cfg);
    run_attack(cfg);
    run_reconstruct(cfg);
    CHECK(slurp(timing_csv_path(cfg)) == timing1);
    CHECK(slurp(attack_json_path(cfg)) == attack1);
    CHECK(slurp(report_json_path(cfg)) == report1);
    CHECK(slurp(search_log_path(cfg)) == log1);
    CHECK(slurp(substitute_model_path(cfg)) == sub1);
}

TEST_CASE("pipeline: constant query count across target depths") {
    for (int d : {1, 2, 3, 4, 5}) {
        TempDir dir("nnsteal_pipe_depth" + std::to_string(d));
        auto j = tiny_config(dir.path.string());
        j["target"]["arch"]["depth"] = d;
        j["target"]["train"]["epochs"] = 2;  // timing does not depend on training quality
        j["space"]["n_archs"] = 12;
        auto cfg = config_from_json(j);
        run_setup(cfg);
        run_attack(cfg);
        std::ifstream in(attack_json_path(cfg));
        nlohmann::json aj;
        in >> aj;
        CHECK(aj.at("n_queries").get<int>() == 20);  // independent of depth
    }
}

TEST_CASE("pipeline: dummy-layer defense shifts the inferred depth by k") {
    TempDir dir("nnsteal_pipe_defend");
    auto j = tiny_config(dir.path.string());
    // pure depth timing isolates the layer-count channel
    j["timing"]["cost_model"] = {{"alpha", 0.0},       {"beta", 1e-5}, {"gamma", 0.0},
                                 {"noise_sigma", 0.0}, {"seed", 5},    {"id", "cm-pure-depth"}};
    j["space"]["depth_range"] = {1, 10};
    j["space"]["n_archs"] = 80;
    j["regressor"]["kinds"] = {"decision-tree"};
    j["regressor"]["features"] = "time-only";
    j["defend"] = {{"mode", "dummy-layers"}, {"k", 3}};
    auto cfg = config_from_json(j);

    run_setup(cfg);
    run_defend(cfg);
    std::ifstream in(defense_json_path(cfg));
    nlohmann::json dj;
    in >> dj;
    CHECK(dj.at("inferred_before").get<int>() == 3);
    CHECK(dj.at("inferred_after").get<int>() == 6);
    CHECK(dj.at("depth_shift").get<int>() == 3);
}

TEST_CASE("pipeline: poisoning defense strictly raises holdout MSE") {
    TempDir dir("nnsteal_pipe_poison");
    auto j = tiny_config(dir.path.string());
    j["regressor"]["kinds"] = {"ridge"};
    j["defend"] = {{"mode", "poison"}, {"fraction", 0.3}, {"strategy", "label-flip"}};
    auto cfg = config_from_json(j);

    run_setup(cfg);
    run_defend(cfg);
    std::ifstream in(defense_json_path(cfg));
    nlohmann::json dj;
    in >> dj;
    CHECK(dj.at("poisoned_holdout_mse").get<double>() > dj.at("clean_holdout_mse").get<double>());
}

TEST_CASE("pipeline: missing data source fails with a config error, no artifacts") {
    TempDir dir("nnsteal_pipe_missing");
    auto j = tiny_config(dir.path.string());
    j["data"]["source"] = "cifar10-binary";
    j["data"]["cifar_path"] = (dir.path / "does_not_exist.bin").string();
    auto cfg = config_from_json(j);
    CHECK_THROWS_AS(run_setup(cfg), ConfigError);
    CHECK_FALSE(std::filesystem::exists(timing_csv_path(cfg)));
    CHECK_FALSE(std::filesystem::exists(recon_data_path(cfg)));
}
