#include "nnsteal/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "nnsteal/arch.hpp"

namespace nnsteal::nas {

void SearchConfig::validate() const {
    if (k < 1) throw std::invalid_argument("search: k must be >= 1");
    if (num_candidates < 1) throw std::invalid_argument("search: num_candidates must be >= 1");
    if (clip_low >= clip_high) throw std::invalid_argument("search: clip_low must be < clip_high");
    if (kernel_choices.empty() || filter_choices.empty())
        throw std::invalid_argument("search: choice sets must be non-empty");
    if (reward_window < 1) throw std::invalid_argument("search: reward_window must be >= 1");
}

namespace {

// Downsampling slots under the pool policy: after every pool_every-th
// stride-1 conv the next counted layer halves the spatial extent, while it
// stays above min_spatial. With maxpool substitution that layer is a searched
// stride-2 conv; otherwise it is a real MaxPool occupying a counted slot.
struct SlotPlan {
    std::vector<bool> is_pool_slot;  // per counted layer
    std::vector<int> conv_stride;    // stride for conv slots (1 or 2)
};

SlotPlan plan_slots(const SearchConfig& cfg) {
    SlotPlan plan;
    int spatial = std::min(cfg.input_shape.h, cfg.input_shape.w);
    int convs_since_pool = 0;
    for (int i = 0; i < cfg.k; ++i) {
        const bool downsample =
            convs_since_pool >= cfg.pool_every && spatial / 2 >= cfg.min_spatial;
        if (downsample) {
            spatial /= 2;
            convs_since_pool = 0;
            if (cfg.maxpool_substitution) {
                plan.is_pool_slot.push_back(false);
                plan.conv_stride.push_back(2);
                ++convs_since_pool;  // the strided conv is itself a conv
            } else {
                plan.is_pool_slot.push_back(true);
                plan.conv_stride.push_back(0);
            }
        } else {
            plan.is_pool_slot.push_back(false);
            plan.conv_stride.push_back(1);
            ++convs_since_pool;
        }
    }
    return plan;
}

ControllerConfig controller_config(const SearchConfig& cfg) {
    ControllerConfig cc;
    cc.n_kernel = static_cast<int>(cfg.kernel_choices.size());
    cc.n_filter = static_cast<int>(cfg.filter_choices.size());
    return cc;
}

}  // namespace

std::pair<nn::ArchitectureSpec, Trajectory> sample_architecture(const Controller& ctrl,
                                                                const SearchConfig& cfg, Rng& rng) {
    cfg.validate();
    const SlotPlan plan = plan_slots(cfg);

    std::vector<int> schedule;
    for (int i = 0; i < cfg.k; ++i) {
        if (plan.is_pool_slot[static_cast<size_t>(i)]) continue;
        schedule.push_back(kKernelHead);
        schedule.push_back(kFilterHead);
    }
    EpisodeTrace trace = ctrl.sample(schedule, rng);

    nn::ArchitectureSpec arch;
    arch.input_shape = cfg.input_shape;
    arch.num_classes = cfg.num_classes;
    int channels = cfg.input_shape.c;
    size_t step = 0;
    for (int i = 0; i < cfg.k; ++i) {
        if (plan.is_pool_slot[static_cast<size_t>(i)]) {
            arch.layers.emplace_back(nn::MaxPoolSpec{2, 2});
            continue;
        }
        const int kernel = cfg.kernel_choices[static_cast<size_t>(trace.actions[step])];
        const int filters = cfg.filter_choices[static_cast<size_t>(trace.actions[step + 1])];
        step += 2;
        arch.layers.emplace_back(
            nn::Conv2DSpec{filters, kernel, plan.conv_stride[static_cast<size_t>(i)],
                           nn::Padding::Same});
        arch.layers.emplace_back(nn::ActivationSpec{nn::ActKind::Relu});
        channels = filters;
    }
    arch.layers.emplace_back(nn::GlobalAvgPoolSpec{});
    arch.layers.emplace_back(nn::FullyConnectedSpec{channels, cfg.num_classes});

    Trajectory traj;
    traj.heads = std::move(trace.heads);
    traj.actions = std::move(trace.actions);
    traj.log_probs = std::move(trace.log_probs);
    return {std::move(arch), std::move(traj)};
}

double compute_reward(std::span<const double> val_accuracies, const SearchConfig& cfg) {
    if (val_accuracies.empty())
        throw std::invalid_argument("compute_reward: need at least one accuracy");
    const size_t w = std::min(val_accuracies.size(), static_cast<size_t>(cfg.reward_window));
    double best = 0.0;
    for (size_t i = val_accuracies.size() - w; i < val_accuracies.size(); ++i)
        best = std::max(best, val_accuracies[i]);
    const double cubed = best * best * best;
    if (cfg.literal_reward) return std::clamp(cubed, cfg.clip_low, cfg.clip_high);
    return cubed;
}

bool reinforce_update(Controller& ctrl, std::span<const Trajectory> batch,
                      const SearchConfig& cfg) {
    if (batch.empty()) throw std::invalid_argument("reinforce_update: empty batch");

    double mean_r = 0.0;
    for (const auto& t : batch) mean_r += t.reward;
    mean_r /= static_cast<double>(batch.size());

    double b = 0.0;
    if (cfg.baseline == SearchConfig::Baseline::Ema) {
        if (!ctrl.baseline_init) {
            ctrl.baseline = mean_r;
            ctrl.baseline_init = true;
        }
        b = ctrl.baseline;
    }

    std::vector<double> grad(ctrl.param_count(), 0.0);
    for (const auto& t : batch) {
        double adv = t.reward - b;
        if (!cfg.literal_reward) adv = std::clamp(adv, cfg.clip_low, cfg.clip_high);
        ctrl.accumulate_log_prob_grad(t.heads, t.actions, adv / static_cast<double>(batch.size()),
                                      grad);
    }

    for (double g : grad)
        if (!std::isfinite(g)) {
            std::cerr << "warning: non-finite controller gradient; update skipped\n";
            return false;
        }

    auto theta = ctrl.params();
    for (size_t i = 0; i < theta.size(); ++i) theta[i] += cfg.controller_lr * grad[i];

    if (cfg.baseline == SearchConfig::Baseline::Ema)
        ctrl.baseline = cfg.baseline_decay * ctrl.baseline + (1.0 - cfg.baseline_decay) * mean_r;
    return true;
}

namespace {

struct ReconSplit {
    std::vector<Tensor> train_x, val_x;
    std::vector<std::vector<double>> train_y, val_y;
};

ReconSplit split_recon(const nn::LabeledDataset& recon, double val_fraction, uint64_t seed) {
    const size_t n = recon.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    const size_t n_val = std::max<size_t>(1, static_cast<size_t>(val_fraction * n));
    if (n_val >= n) throw std::invalid_argument("run_search: reconstruction set too small");

    ReconSplit s;
    for (size_t i = 0; i < n; ++i) {
        const size_t j = order[i];
        if (i < n_val) {
            s.val_x.push_back(recon.inputs[j]);
            s.val_y.push_back(recon.soft_labels[j]);
        } else {
            s.train_x.push_back(recon.inputs[j]);
            s.train_y.push_back(recon.soft_labels[j]);
        }
    }
    return s;
}

template <typename EvalFn>
SearchResult search_loop(const SearchConfig& cfg, uint64_t seed, EvalFn&& evaluate_candidate) {
    cfg.validate();
    Controller ctrl(controller_config(cfg), Rng(seed).split(0).next_u64());
    Rng sample_rng = Rng(seed).split(1);

    SearchResult result;
    result.best_val_acc = -1.0;
    for (int i = 0; i < cfg.num_candidates; ++i) {
        auto [arch, traj] = sample_architecture(ctrl, cfg, sample_rng);
        traj.arch_id = "cand-" + std::to_string(i);

        double val_acc = 0.0;
        std::optional<nn::TrainedNetwork> net;
        traj.reward = evaluate_candidate(i, arch, val_acc, net);

        reinforce_update(ctrl, std::span<const Trajectory>{&traj, 1}, cfg);

        if (val_acc > result.best_val_acc) {
            result.best_val_acc = val_acc;
            result.best_arch = arch;
            result.best_net = std::move(net);
        }
        CandidateRecord rec;
        rec.index = i;
        rec.arch_json = nn::arch_to_string(arch);
        rec.val_acc = val_acc;
        rec.reward = traj.reward;
        rec.best_so_far = result.best_val_acc;
        result.log.push_back(std::move(rec));
    }
    result.final_controller = std::move(ctrl);
    return result;
}

}  // namespace

SearchResult run_search(const SearchConfig& cfg, const nn::LabeledDataset& recon, uint64_t seed) {
    if (!recon.has_soft_labels())
        throw std::invalid_argument("run_search: reconstruction data must carry soft labels");
    const ReconSplit split = split_recon(recon, cfg.val_fraction, Rng(seed).split(2).next_u64());

    return search_loop(cfg, seed,
                       [&](int i, const nn::ArchitectureSpec& arch, double& val_acc,
                           std::optional<nn::TrainedNetwork>& net) -> double {
                           try {
                               nn::TrainOptions opt;
                               opt.epochs = cfg.epochs_per_candidate;
                               opt.lr = cfg.candidate_lr;
                               opt.batch_size = cfg.candidate_batch;
                               opt.seed = Rng(seed).split(100 + static_cast<uint64_t>(i)).next_u64();
                               auto tr = nn::train_distilled(arch, split.train_x, split.train_y,
                                                             opt, split.val_x, split.val_y);
                               const double reward = compute_reward(tr.epoch_val_acc, cfg);
                               const size_t w = std::min(tr.epoch_val_acc.size(),
                                                         static_cast<size_t>(cfg.reward_window));
                               val_acc = *std::max_element(tr.epoch_val_acc.end() - w,
                                                           tr.epoch_val_acc.end());
                               net = std::move(tr.net);
                               return reward;
                           } catch (const std::exception& e) {
                               std::cerr << "candidate " << i << " failed: " << e.what() << "\n";
                               val_acc = 0.0;
                               net.reset();
                               return cfg.clip_low;
                           }
                       });
}

SearchResult run_search_surrogate(const SearchConfig& cfg,
                                  const std::function<double(const nn::ArchitectureSpec&)>& reward,
                                  uint64_t seed) {
    return search_loop(cfg, seed,
                       [&](int, const nn::ArchitectureSpec& arch, double& val_acc,
                           std::optional<nn::TrainedNetwork>& net) -> double {
                           const double r = reward(arch);
                           val_acc = r;
                           net.reset();
                           return r;
                       });
}

namespace {

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void write_search_log_csv(std::span<const CandidateRecord> log,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "candidate_idx,arch_json,val_acc,reward,cumulative_best\n";
    char buf[40];
    for (const auto& r : log) {
        out << r.index << "," << csv_quote(r.arch_json) << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.val_acc);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.reward);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.best_so_far);
        out << buf << "\n";
    }
}

}  // namespace nnsteal::nas
