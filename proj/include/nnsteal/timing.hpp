#pragma once

#include <span>
#include <string>
#include <vector>

#include "nnsteal/network.hpp"
#include "nnsteal/rng.hpp"

namespace nnsteal::timing {

// Deterministic surrogate for hardware inference time:
//   t = (alpha * multiplications + gamma * comparisons + beta * depth)
//       * exp(noise_sigma * z)
// with z a standard normal indexed by (seed, draw). noise_sigma = 0 gives
// exact, reproducible times on any machine.
struct CostModel {
    double alpha = 1e-9;       // seconds per multiplication
    double beta = 1e-5;        // seconds per counted layer
    double gamma = 0.0;        // seconds per pooling comparison
    double noise_sigma = 0.0;  // multiplicative log-normal spread
    uint64_t seed = 0;
    std::string id = "cm-default";

    void validate() const;
};

double simulate_time(const nn::ArchitectureSpec& arch, const CostModel& model, uint64_t draw);

// Round-trip model for a remote deployment:
//   t_res = a * t_proc + t_net + jitter
struct RemoteChannel {
    double a = 1.0;
    double t_net_mean = 0.0;
    double jitter_sigma = 0.0;
    uint64_t seed = 0;

    void validate() const;
};

// Stateful sampler: draws one jitter value per call from the channel's
// seeded stream. Response times are clamped at zero.
class RemoteChannelSampler {
public:
    explicit RemoteChannelSampler(const RemoteChannel& ch);
    double response_time(double t_proc);

private:
    RemoteChannel ch_;
    Rng rng_;
};

struct ProcTimeEstimate {
    double t_proc;
    double std_error;  // jitter_sigma / (a * sqrt(N))
};

// Inverts the round-trip model from observed response times:
// (mean(samples) - t_net_mean) / a.
ProcTimeEstimate estimate_processing_time(std::span<const double> t_res_samples,
                                          const RemoteChannel& ch);

struct WallMeasurement {
    double mean_s = 0.0;
    std::vector<double> samples_s;
};

// Mean of n_runs forward-pass durations on the process-CPU-time clock.
// Measurements are serialized process-wide and the measured forward pass is
// single-threaded. Throws if no suitable clock is available.
WallMeasurement measure_wall(const nn::TrainedNetwork& net, const Tensor& input, int n_runs);

// Dummy-layer mitigation: k identity-preserving 1x1 convolutions inserted
// after the last spatial layer. They add execution time and counted depth
// without changing any posterior.
nn::ArchitectureSpec pad_with_dummy_layers(const nn::ArchitectureSpec& arch, int k);
nn::TrainedNetwork pad_with_dummy_layers(const nn::TrainedNetwork& net, int k);

}  // namespace nnsteal::timing
