#pragma once

#include <span>
#include <vector>

#include "nnsteal/rng.hpp"

namespace nnsteal::nas {

// Policy network: one LSTM cell (hidden size 32) whose hidden state feeds two
// softmax heads, one over kernel choices and one over filter counts. Step t
// consumes the embedding of the action taken at step t-1 (a zero vector at
// t = 0); the hidden state starts at zero.
struct ControllerConfig {
    int hidden = 32;
    int emb_dim = 32;
    int n_kernel = 2;
    int n_filter = 3;
    double init_range = 0.1;
};

// Head ids used in step schedules.
inline constexpr int kKernelHead = 0;
inline constexpr int kFilterHead = 1;

struct EpisodeTrace {
    std::vector<int> heads;
    std::vector<int> actions;
    std::vector<std::vector<double>> probs;  // per-step action distribution
    std::vector<double> log_probs;

    double total_log_prob() const;
};

class Controller {
public:
    Controller(const ControllerConfig& cfg, uint64_t seed);

    // Draw one action per scheduled step.
    EpisodeTrace sample(std::span<const int> head_schedule, Rng& rng) const;

    // Distributions and log-probs for a forced action sequence.
    EpisodeTrace run_teacher_forced(std::span<const int> heads,
                                    std::span<const int> actions) const;

    // grad += scale * d(sum_t log P(a_t | a_<t)) / d(theta). grad must have
    // param_count() entries.
    void accumulate_log_prob_grad(std::span<const int> heads, std::span<const int> actions,
                                  double scale, std::span<double> grad) const;

    size_t param_count() const { return theta_.size(); }
    std::span<double> params() { return theta_; }
    std::span<const double> params() const { return theta_; }
    const ControllerConfig& config() const { return cfg_; }
    uint64_t seed() const { return seed_; }

    // optimizer state: exponential moving-average reward baseline
    double baseline = 0.0;
    bool baseline_init = false;

private:
    struct StepCache;
    void step_forward(int prev_global_action, std::span<const double> h_in,
                      std::span<const double> c_in, int head, StepCache& cache) const;

    ControllerConfig cfg_;
    uint64_t seed_ = 0;
    std::vector<double> theta_;

    // parameter block offsets into theta_
    size_t off_wx_, off_wh_, off_b_, off_emb_, off_wk_, off_bk_, off_wf_, off_bf_;
    int gate_rows_;  // 4 * hidden

    friend class ControllerGradCheck;
};

}  // namespace nnsteal::nas
