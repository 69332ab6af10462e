#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nnsteal/controller.hpp"
#include "nnsteal/train.hpp"

namespace nnsteal::nas {

struct SearchConfig {
    int k = 3;  // counted depth of every candidate (from the regressor)
    std::vector<int> kernel_choices{3, 5};
    std::vector<int> filter_choices{32, 64, 128};
    int num_candidates = 50;
    int epochs_per_candidate = 20;
    int reward_window = 5;
    double clip_low = -0.05;
    double clip_high = 0.05;
    bool maxpool_substitution = true;  // stride-2 convs at the pool-policy positions
    int pool_every = 2;
    int min_spatial = 4;
    enum class Baseline { None, Ema } baseline = Baseline::Ema;
    double baseline_decay = 0.8;
    double controller_lr = 0.05;
    // Literal reward mode clips the cubed accuracy itself (which saturates for
    // any accuracy above ~0.37); the default clips the baseline-subtracted
    // advantage instead and keeps the raw cube as the reward.
    bool literal_reward = false;

    // candidate training
    double candidate_lr = 0.1;
    int candidate_batch = 8;
    double val_fraction = 0.2;

    Shape input_shape{8, 8, 3};
    int num_classes = 4;

    void validate() const;
};

// One sampled candidate: the controller's action sequence with per-step log
// probabilities and the resulting reward.
struct Trajectory {
    std::vector<int> heads;
    std::vector<int> actions;
    std::vector<double> log_probs;
    double reward = 0.0;
    std::string arch_id;
};

// 2k sequential decisions (kernel, filters per searched conv). The sampled
// spec has exactly k counted layers and ends with GAP + classifier.
std::pair<nn::ArchitectureSpec, Trajectory> sample_architecture(const Controller& ctrl,
                                                                const SearchConfig& cfg, Rng& rng);

// max of the last reward_window validation accuracies, cubed; clipped to
// (clip_low, clip_high) in literal mode.
double compute_reward(std::span<const double> val_accuracies, const SearchConfig& cfg);

// One REINFORCE ascent step from a trajectory batch. Returns false (and
// leaves the controller untouched) when the gradient is non-finite.
bool reinforce_update(Controller& ctrl, std::span<const Trajectory> batch,
                      const SearchConfig& cfg);

struct CandidateRecord {
    int index = 0;
    std::string arch_json;
    double val_acc = 0.0;
    double reward = 0.0;
    double best_so_far = 0.0;
};

struct SearchResult {
    nn::ArchitectureSpec best_arch;
    std::optional<nn::TrainedNetwork> best_net;
    double best_val_acc = 0.0;
    std::vector<CandidateRecord> log;
    std::optional<Controller> final_controller;
};

// Full reconstruction-phase loop: sample -> distill -> validate -> reward ->
// controller update, num_candidates times; returns the candidate with the
// highest validation accuracy. recon must carry soft labels.
SearchResult run_search(const SearchConfig& cfg, const nn::LabeledDataset& recon, uint64_t seed);

// Same loop driven by an external reward (no candidate training); used to
// exercise the controller/update machinery with deterministic rewards.
SearchResult run_search_surrogate(const SearchConfig& cfg,
                                  const std::function<double(const nn::ArchitectureSpec&)>& reward,
                                  uint64_t seed);

void write_search_log_csv(std::span<const CandidateRecord> log,
                          const std::filesystem::path& path);

}  // namespace nnsteal::nas
