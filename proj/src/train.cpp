#include "nnsteal/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nnsteal/rng.hpp"

namespace nnsteal::nn {

namespace {

constexpr double kProbFloor = 1e-15;

// dL/d(posterior) for cross-entropy on a hard label.
void ce_grad(const std::vector<double>& p, int label, std::vector<double>& grad) {
    grad.assign(p.size(), 0.0);
    grad[static_cast<size_t>(label)] = -1.0 / std::max(p[static_cast<size_t>(label)], kProbFloor);
}

// dL/d(posterior) for the squared-error distillation loss.
void l2_grad(const std::vector<double>& p, const std::vector<double>& target,
             std::vector<double>& grad) {
    grad.resize(p.size());
    for (size_t i = 0; i < p.size(); ++i) grad[i] = 2.0 * (p[i] - target[i]);
}

struct SampleLoss {
    double loss;
};

template <typename LossFn>
double run_epoch(TrainedNetwork& net, std::span<const size_t> order,
                 std::span<const Tensor> inputs, LossFn&& loss_and_grad,
                 const TrainOptions& opt, std::vector<GradBuffer>& bufs) {
    const size_t n = order.size();
    const int bs = std::max(1, opt.batch_size);
    double total_loss = 0.0;

    for (size_t start = 0; start < n; start += static_cast<size_t>(bs)) {
        const size_t bend = std::min(n, start + static_cast<size_t>(bs));
        const int bn = static_cast<int>(bend - start);
        for (int b = 0; b < bn; ++b) bufs[static_cast<size_t>(b)].zero();

        std::vector<double> batch_losses(static_cast<size_t>(bn), 0.0);
#pragma omp parallel for schedule(static) if (opt.parallel_batch)
        for (int b = 0; b < bn; ++b) {
            const size_t idx = order[start + static_cast<size_t>(b)];
            ForwardTrace trace = forward_cached(net, inputs[idx], Backend::Serial);
            std::vector<double> grad_post;
            batch_losses[static_cast<size_t>(b)] =
                loss_and_grad(idx, trace.posterior(), grad_post);
            backward(net, trace, grad_post, bufs[static_cast<size_t>(b)], Backend::Serial);
        }

        // deterministic reduction: sample order, not thread order
        const double scale = opt.lr / static_cast<double>(bn);
        for (size_t li = 0; li < net.params.size(); ++li) {
            auto& p = net.params[li];
            for (int b = 0; b < bn; ++b) {
                const auto& g = bufs[static_cast<size_t>(b)].layers[li];
                for (size_t j = 0; j < p.w.size(); ++j) p.w[j] -= scale * g.w[j];
                for (size_t j = 0; j < p.b.size(); ++j) p.b[j] -= scale * g.b[j];
            }
        }
        for (double l : batch_losses) total_loss += l;
    }
    return total_loss / static_cast<double>(n);
}

}  // namespace

std::vector<size_t> LabeledDataset::indices_of(Split s) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(i);
    return out;
}

void LabeledDataset::validate() const {
    const size_t n = inputs.size();
    if (has_hard_labels() && hard_labels.size() != n)
        throw std::invalid_argument("dataset: |inputs| != |labels|");
    if (has_soft_labels() && soft_labels.size() != n)
        throw std::invalid_argument("dataset: |inputs| != |labels|");
    if (split.size() != n) throw std::invalid_argument("dataset: |inputs| != |split tags|");
    for (const auto& s : soft_labels) {
        const double sum = std::accumulate(s.begin(), s.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("dataset: soft label does not sum to 1");
    }
}

int argmax(std::span<const double> v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[static_cast<size_t>(best)]) best = static_cast<int>(i);
    return best;
}

TrainResult train_supervised(const ArchitectureSpec& arch, const LabeledDataset& data,
                             const TrainOptions& opt) {
    data.validate();
    if (!data.has_hard_labels())
        throw std::invalid_argument("train_supervised requires hard labels");
    auto train_idx = data.indices_of(Split::Train);
    if (train_idx.empty()) throw std::invalid_argument("train_supervised: empty train split");
    if (opt.epochs < 1) throw std::invalid_argument("train_supervised: epochs must be >= 1");
    if (opt.lr < 0.0) throw std::invalid_argument("train_supervised: lr must be >= 0");

    TrainResult result;
    result.net = init_network(arch, opt.seed);
    Rng shuffle_rng = Rng(opt.seed).split(1);

    std::vector<GradBuffer> bufs(static_cast<size_t>(std::max(1, opt.batch_size)));
    for (auto& b : bufs) b = make_grad_buffer(result.net);

    auto loss_and_grad = [&](size_t idx, const std::vector<double>& p,
                             std::vector<double>& grad) {
        const int label = data.hard_labels[idx];
        ce_grad(p, label, grad);
        return -std::log(std::max(p[static_cast<size_t>(label)], kProbFloor));
    };

    for (int e = 0; e < opt.epochs; ++e) {
        shuffle_rng.shuffle(train_idx);
        result.epoch_loss.push_back(
            run_epoch(result.net, train_idx, data.inputs, loss_and_grad, opt, bufs));
    }
    return result;
}

TrainResult train_distilled(const ArchitectureSpec& arch, std::span<const Tensor> inputs,
                            std::span<const std::vector<double>> target_posteriors,
                            const TrainOptions& opt, std::span<const Tensor> val_inputs,
                            std::span<const std::vector<double>> val_posteriors) {
    if (inputs.size() != target_posteriors.size())
        throw std::invalid_argument("train_distilled: |inputs| != |target posteriors|");
    if (inputs.empty()) throw std::invalid_argument("train_distilled: empty dataset");
    for (const auto& t : target_posteriors)
        if (static_cast<int>(t.size()) != arch.num_classes)
            throw std::invalid_argument("train_distilled: posterior length != num_classes");

    TrainResult result;
    result.net = init_network(arch, opt.seed);
    Rng shuffle_rng = Rng(opt.seed).split(1);

    std::vector<size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), size_t{0});

    std::vector<GradBuffer> bufs(static_cast<size_t>(std::max(1, opt.batch_size)));
    for (auto& b : bufs) b = make_grad_buffer(result.net);

    auto loss_and_grad = [&](size_t idx, const std::vector<double>& p,
                             std::vector<double>& grad) {
        const auto& target = target_posteriors[idx];
        l2_grad(p, target, grad);
        double loss = 0.0;
        for (size_t i = 0; i < p.size(); ++i) {
            const double d = p[i] - target[i];
            loss += d * d;
        }
        return loss;
    };

    for (int e = 0; e < opt.epochs; ++e) {
        shuffle_rng.shuffle(order);
        result.epoch_loss.push_back(
            run_epoch(result.net, order, inputs, loss_and_grad, opt, bufs));
        if (!val_inputs.empty()) {
            int hits = 0;
            const int64_t vn = static_cast<int64_t>(val_inputs.size());
#pragma omp parallel for schedule(static) reduction(+ : hits)
            for (int64_t i = 0; i < vn; ++i) {
                auto p = forward(result.net, val_inputs[static_cast<size_t>(i)], Backend::Serial);
                if (argmax(p) == argmax(val_posteriors[static_cast<size_t>(i)])) ++hits;
            }
            result.epoch_val_acc.push_back(static_cast<double>(hits) / static_cast<double>(vn));
        }
    }
    return result;
}

double distillation_loss(const TrainedNetwork& net, std::span<const Tensor> inputs,
                         std::span<const std::vector<double>> target_posteriors) {
    if (inputs.size() != target_posteriors.size() || inputs.empty())
        throw std::invalid_argument("distillation_loss: bad input sizes");
    double total = 0.0;
    const int64_t n = static_cast<int64_t>(inputs.size());
#pragma omp parallel for schedule(static) reduction(+ : total)
    for (int64_t i = 0; i < n; ++i) {
        auto p = forward(net, inputs[static_cast<size_t>(i)], Backend::Serial);
        const auto& t = target_posteriors[static_cast<size_t>(i)];
        double loss = 0.0;
        for (size_t j = 0; j < p.size(); ++j) {
            const double d = p[j] - t[j];
            loss += d * d;
        }
        total += loss;
    }
    return total / static_cast<double>(n);
}

double evaluate(const TrainedNetwork& net, const LabeledDataset& data, Split split) {
    data.validate();
    if (!data.has_hard_labels()) throw std::invalid_argument("evaluate requires hard labels");
    auto idx = data.indices_of(split);
    if (idx.empty()) throw std::invalid_argument("evaluate: empty split");
    int hits = 0;
    const int64_t n = static_cast<int64_t>(idx.size());
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (int64_t i = 0; i < n; ++i) {
        const size_t j = idx[static_cast<size_t>(i)];
        auto p = forward(net, data.inputs[j], Backend::Serial);
        if (argmax(p) == data.hard_labels[j]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double agreement(const TrainedNetwork& a, const TrainedNetwork& b,
                 std::span<const Tensor> inputs) {
    if (a.num_classes() != b.num_classes())
        throw std::invalid_argument("agreement: class-count mismatch");
    if (inputs.empty()) throw std::invalid_argument("agreement: empty input set");
    int hits = 0;
    const int64_t n = static_cast<int64_t>(inputs.size());
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (int64_t i = 0; i < n; ++i) {
        auto pa = forward(a, inputs[static_cast<size_t>(i)], Backend::Serial);
        auto pb = forward(b, inputs[static_cast<size_t>(i)], Backend::Serial);
        if (argmax(pa) == argmax(pb)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace nnsteal::nn
