#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnsteal/datasets.hpp"
#include "nnsteal/regress.hpp"
#include "nnsteal/search.hpp"
#include "nnsteal/timing_dataset.hpp"

namespace nnsteal::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kPhaseError = 3;

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class PhaseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flag overrides applied on top of the config file. The effective config
// (file + overrides) is what the fingerprint covers.
struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> timing_mode;
    std::optional<std::string> regressors;  // comma-separated kinds
    std::optional<int> n_runs;
    std::optional<bool> literal_reward;
    std::optional<std::string> out_dir;
    std::optional<int> depth;  // reconstruct: override the inferred depth
};

struct PipelineConfig {
    nlohmann::json raw;  // effective config (after overrides)
    std::string fingerprint;

    uint64_t seed = 1;
    std::filesystem::path out_dir = "out";

    // data
    std::string data_source = "synthetic-blobs";
    attack::BlobConfig blobs;
    std::filesystem::path cifar_path, idx_images, idx_labels;

    // target
    std::optional<std::filesystem::path> target_model_path;
    std::optional<nn::ArchitectureSpec> target_arch;
    int target_epochs = 30;
    double target_lr = 0.05;
    int target_batch = 8;

    // timing
    attack::TimingMode timing_mode = attack::TimingMode::CostModel;
    timing::CostModel cost_model;
    int n_runs = 20;

    // attacker arch space
    attack::ArchSpace space;
    int n_archs = 100;

    // reconstruction setup
    int pool_size = 400;
    double membership_threshold = 0.9;

    // regression
    std::vector<regress::RegressorKind> regressor_kinds{regress::RegressorKind::RandomForest};
    regress::FeatureSet feature_set = regress::FeatureSet::TimePlusParams;
    double holdout_fraction = 0.25;
    regress::Hyper hyper;

    // search
    nas::SearchConfig search;
    std::optional<int> depth_override;

    // defense
    std::string defend_mode = "dummy-layers";
    int defend_k = 3;
    double defend_fraction = 0.3;
    attack::PoisonStrategy defend_strategy = attack::PoisonStrategy::LabelFlip;
};

PipelineConfig load_config(const std::filesystem::path& path, const Overrides& ov = {});
PipelineConfig config_from_json(nlohmann::json j, const Overrides& ov = {});

// Phase entry points. They throw ConfigError / PhaseError; main() maps those
// to exit codes. All artifact files land under cfg.out_dir.
void run_setup(const PipelineConfig& cfg);
void run_attack(const PipelineConfig& cfg);
void run_reconstruct(const PipelineConfig& cfg);
void run_defend(const PipelineConfig& cfg);
void run_report(const PipelineConfig& cfg, bool verify);

// Artifact file names under out_dir.
std::filesystem::path timing_csv_path(const PipelineConfig&);
std::filesystem::path target_model_path(const PipelineConfig&);
std::filesystem::path recon_data_path(const PipelineConfig&);
std::filesystem::path attack_json_path(const PipelineConfig&);
std::filesystem::path report_json_path(const PipelineConfig&);
std::filesystem::path search_log_path(const PipelineConfig&);
std::filesystem::path substitute_model_path(const PipelineConfig&);
std::filesystem::path defense_json_path(const PipelineConfig&);

}  // namespace nnsteal::cli
