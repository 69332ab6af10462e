#include "nnsteal/timing.hpp"

#include <time.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace nnsteal::timing {

void CostModel::validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || noise_sigma < 0)
        throw std::invalid_argument("cost model: alpha, beta, gamma, noise_sigma must be >= 0");
}

double simulate_time(const nn::ArchitectureSpec& arch, const CostModel& model, uint64_t draw) {
    model.validate();
    const auto counts = nn::op_counts(arch);
    const double base = model.alpha * static_cast<double>(counts.multiplications) +
                        model.gamma * static_cast<double>(counts.comparisons) +
                        model.beta * static_cast<double>(nn::depth(arch));
    if (model.noise_sigma == 0.0) return base;
    return base * std::exp(model.noise_sigma * counter_normal(model.seed, draw));
}

void RemoteChannel::validate() const {
    if (a <= 0) throw std::invalid_argument("remote channel: a must be > 0");
    if (t_net_mean < 0 || jitter_sigma < 0)
        throw std::invalid_argument("remote channel: t_net_mean and jitter_sigma must be >= 0");
}

RemoteChannelSampler::RemoteChannelSampler(const RemoteChannel& ch) : ch_(ch), rng_(ch.seed) {
    ch_.validate();
}

double RemoteChannelSampler::response_time(double t_proc) {
    if (t_proc < 0) throw std::invalid_argument("remote channel: t_proc must be >= 0");
    const double jitter = ch_.jitter_sigma == 0.0 ? 0.0 : rng_.normal(0.0, ch_.jitter_sigma);
    const double t = ch_.a * t_proc + ch_.t_net_mean + jitter;
    return t < 0.0 ? 0.0 : t;
}

ProcTimeEstimate estimate_processing_time(std::span<const double> t_res_samples,
                                          const RemoteChannel& ch) {
    ch.validate();
    if (t_res_samples.empty())
        throw std::invalid_argument("estimate_processing_time: no samples");
    double mean = 0.0;
    for (double t : t_res_samples) mean += t;
    mean /= static_cast<double>(t_res_samples.size());
    ProcTimeEstimate est;
    est.t_proc = (mean - ch.t_net_mean) / ch.a;
    est.std_error = ch.jitter_sigma / (ch.a * std::sqrt(static_cast<double>(t_res_samples.size())));
    return est;
}

namespace {

// at most one wall-clock measurement in flight process-wide
std::mutex& measurement_lease() {
    static std::mutex m;
    return m;
}

double process_cpu_seconds() {
    timespec ts;
    if (clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts) != 0)
        throw std::runtime_error("measure_wall: CLOCK_PROCESS_CPUTIME_ID unavailable");
    return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

void check_clock_resolution() {
    timespec res;
    if (clock_getres(CLOCK_PROCESS_CPUTIME_ID, &res) != 0)
        throw std::runtime_error("measure_wall: process CPU-time clock unavailable");
    const double r = static_cast<double>(res.tv_sec) + static_cast<double>(res.tv_nsec) * 1e-9;
    if (r > 1e-6)
        throw std::runtime_error("measure_wall: clock resolution coarser than 1e-6 s");
}

}  // namespace

WallMeasurement measure_wall(const nn::TrainedNetwork& net, const Tensor& input, int n_runs) {
    if (n_runs < 1) throw std::invalid_argument("measure_wall: n_runs must be >= 1");
    std::lock_guard<std::mutex> lease(measurement_lease());
    check_clock_resolution();

    WallMeasurement m;
    m.samples_s.reserve(static_cast<size_t>(n_runs));
    volatile double sink = 0.0;  // keep the forward pass alive
    for (int r = 0; r < n_runs; ++r) {
        const double t0 = process_cpu_seconds();
        auto posterior = nn::forward(net, input, nn::Backend::Serial);
        const double t1 = process_cpu_seconds();
        sink = sink + posterior[0];
        m.samples_s.push_back(t1 - t0);
    }
    (void)sink;
    double sum = 0.0;
    for (double s : m.samples_s) sum += s;
    m.mean_s = sum / static_cast<double>(n_runs);
    return m;
}

namespace {

// Insertion point for pads: right after the last spatial (conv/pool) layer,
// or before the trailing classifier stack when the net is dense-only.
size_t pad_insertion_index(const nn::ArchitectureSpec& arch) {
    for (size_t i = arch.layers.size(); i-- > 0;) {
        if (std::holds_alternative<nn::Conv2DSpec>(arch.layers[i]) ||
            std::holds_alternative<nn::MaxPoolSpec>(arch.layers[i]))
            return i + 1;
    }
    return 0;
}

}  // namespace

nn::ArchitectureSpec pad_with_dummy_layers(const nn::ArchitectureSpec& arch, int k) {
    if (k < 0) throw std::invalid_argument("pad_with_dummy_layers: k must be >= 0");
    if (k == 0) return arch;
    nn::ArchitectureSpec padded = arch;
    const size_t at = pad_insertion_index(arch);
    const auto shapes = nn::propagate_shapes(arch);
    const Shape s = at == 0 ? arch.input_shape : shapes[at - 1];
    nn::Conv2DSpec pad{s.c, 1, 1, nn::Padding::Same};
    padded.layers.insert(padded.layers.begin() + static_cast<std::ptrdiff_t>(at),
                         static_cast<size_t>(k), nn::LayerSpec{pad});
    return padded;
}

nn::TrainedNetwork pad_with_dummy_layers(const nn::TrainedNetwork& net, int k) {
    if (k < 0) throw std::invalid_argument("pad_with_dummy_layers: k must be >= 0");
    if (k == 0) return net;
    nn::TrainedNetwork padded;
    padded.arch = pad_with_dummy_layers(net.arch, k);
    padded.rng_seed = net.rng_seed;
    const size_t at = pad_insertion_index(net.arch);
    const auto shapes = nn::propagate_shapes(net.arch);
    const int c = at == 0 ? net.arch.input_shape.c : shapes[at - 1].c;

    nn::LayerParams identity;
    identity.w.assign(static_cast<size_t>(c) * c, 0.0);
    identity.b.assign(static_cast<size_t>(c), 0.0);
    for (int i = 0; i < c; ++i) identity.w[static_cast<size_t>(i) * c + i] = 1.0;

    padded.params.assign(net.params.begin(), net.params.begin() + static_cast<std::ptrdiff_t>(at));
    for (int i = 0; i < k; ++i) padded.params.push_back(identity);
    padded.params.insert(padded.params.end(), net.params.begin() + static_cast<std::ptrdiff_t>(at),
                         net.params.end());
    return padded;
}

}  // namespace nnsteal::timing
