#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nnsteal/network.hpp"

namespace nnsteal::nn {

enum class Split { Train, Val, Test };

// Inputs plus either hard class indices or soft posterior vectors, with a
// split tag per record.
struct LabeledDataset {
    Shape input_shape;
    int num_classes = 0;
    std::vector<Tensor> inputs;
    std::vector<int> hard_labels;                   // empty when soft-labeled
    std::vector<std::vector<double>> soft_labels;   // empty when hard-labeled
    std::vector<Split> split;

    size_t size() const { return inputs.size(); }
    bool has_hard_labels() const { return !hard_labels.empty(); }
    bool has_soft_labels() const { return !soft_labels.empty(); }
    std::vector<size_t> indices_of(Split s) const;
    void validate() const;  // size agreement; soft rows sum to 1 +- 1e-6
};

struct TrainOptions {
    int epochs = 1;
    double lr = 0.05;
    int batch_size = 16;
    uint64_t seed = 0;
    Backend backend = Backend::Serial;
    bool parallel_batch = true;  // per-sample gradients across OpenMP threads
};

struct TrainResult {
    TrainedNetwork net;
    std::vector<double> epoch_loss;     // mean loss per epoch over train split
    std::vector<double> epoch_val_acc;  // only filled when a val set is given
};

// Cross-entropy training on hard labels (train split). Rejects empty or
// soft-labeled data.
TrainResult train_supervised(const ArchitectureSpec& arch, const LabeledDataset& data,
                             const TrainOptions& opt);

// Distillation: squared-error loss between the network posterior and the
// target posterior, summed over classes. When val sets are passed, the
// per-epoch validation accuracy (argmax agreement with the target posterior
// argmax) is recorded; this is the search reward signal.
TrainResult train_distilled(const ArchitectureSpec& arch, std::span<const Tensor> inputs,
                            std::span<const std::vector<double>> target_posteriors,
                            const TrainOptions& opt, std::span<const Tensor> val_inputs = {},
                            std::span<const std::vector<double>> val_posteriors = {});

// Mean squared-error distillation loss of a network on a set of pairs.
double distillation_loss(const TrainedNetwork& net, std::span<const Tensor> inputs,
                         std::span<const std::vector<double>> target_posteriors);

// Fraction of records in the given split whose argmax posterior equals the
// hard label. Rejects an empty split.
double evaluate(const TrainedNetwork& net, const LabeledDataset& data, Split split = Split::Test);

// Fraction of inputs on which the two networks' argmax classes coincide.
// Rejects networks with different class counts.
double agreement(const TrainedNetwork& a, const TrainedNetwork& b, std::span<const Tensor> inputs);

int argmax(std::span<const double> v);

}  // namespace nnsteal::nn
