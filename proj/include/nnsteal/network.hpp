#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nnsteal/arch.hpp"
#include "nnsteal/kernels.hpp"
#include "nnsteal/tensor.hpp"

namespace nnsteal::nn {

struct LayerParams {
    std::vector<double> w;
    std::vector<double> b;
};

// An architecture together with its parameters. Immutable once built for
// inference purposes; training constructs a fresh one.
struct TrainedNetwork {
    ArchitectureSpec arch;
    std::vector<LayerParams> params;  // one entry per layer (empty for weightless layers)
    uint64_t rng_seed = 0;

    int num_classes() const { return arch.num_classes; }
    int64_t total_params() const;
};

// Seeded init: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases 0.
TrainedNetwork init_network(const ArchitectureSpec& arch, uint64_t seed);

// Full forward pass; returns the class posterior (softmax is applied to the
// final output unless the last layer already is a softmax activation).
// Throws ValidationError on a shape mismatch, naming the offending layer.
std::vector<double> forward(const TrainedNetwork& net, const Tensor& input,
                            Backend backend = Backend::Serial);

// Forward pass keeping every intermediate activation (needed by backprop).
// activations[0] is the input; activations[i+1] the output of layer i.
// The final posterior is appended last when an implicit softmax is applied.
struct ForwardTrace {
    std::vector<Tensor> activations;
    std::vector<std::vector<int>> pool_argmax;  // per layer; empty unless maxpool
    bool implicit_softmax = false;
    const std::vector<double>& posterior() const { return activations.back().data; }
};

ForwardTrace forward_cached(const TrainedNetwork& net, const Tensor& input,
                            Backend backend = Backend::Serial);

// Gradient buffers shaped like the network parameters.
struct GradBuffer {
    std::vector<LayerParams> layers;
    void zero();
};

GradBuffer make_grad_buffer(const TrainedNetwork& net);

// Backprop from dL/d(posterior). Accumulates parameter gradients into grads.
void backward(const TrainedNetwork& net, const ForwardTrace& trace,
              const std::vector<double>& grad_posterior, GradBuffer& grads,
              Backend backend = Backend::Serial);

void save_network(const TrainedNetwork& net, const std::filesystem::path& path);
TrainedNetwork load_network(const std::filesystem::path& path);

}  // namespace nnsteal::nn
