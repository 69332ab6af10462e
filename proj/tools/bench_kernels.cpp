// Serial vs OpenMP kernel benchmark. The OpenMP kernels must stay bitwise
// identical to the serial reference, so this also cross-checks outputs.

#include <omp.h>

#include <cstdio>
#include <cstring>
#include <vector>

#include "nnsteal/archspace.hpp"
#include "nnsteal/kernels.hpp"
#include "nnsteal/network.hpp"
#include "nnsteal/rng.hpp"

using namespace nnsteal;
using namespace nnsteal::nn;

namespace {

struct BenchResult {
    double serial_ms;
    double omp_ms;
    bool identical;
};

template <typename SerialFn, typename OmpFn, typename CheckFn>
BenchResult bench(SerialFn&& serial, OmpFn&& omp_fn, CheckFn&& identical, int reps) {
    // warmup
    serial();
    omp_fn();
    double t0 = omp_get_wtime();
    for (int i = 0; i < reps; ++i) serial();
    double t1 = omp_get_wtime();
    for (int i = 0; i < reps; ++i) omp_fn();
    double t2 = omp_get_wtime();
    return {(t1 - t0) * 1e3 / reps, (t2 - t1) * 1e3 / reps, identical()};
}

void report(const char* name, const BenchResult& r) {
    std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   bitwise %s\n", name,
                r.serial_ms, r.omp_ms, r.serial_ms / r.omp_ms, r.identical ? "ok" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());
    Rng rng(42);

    {
        // conv 32x32x64 -> 64, k3
        const Shape in_shape{32, 32, 64};
        const Conv2DSpec spec{64, 3, 1, Padding::Same};
        const ConvGeom g = make_conv_geom(in_shape, spec);
        std::vector<double> in(static_cast<size_t>(in_shape.size()));
        std::vector<double> w(static_cast<size_t>(spec.kernel) * spec.kernel * in_shape.c *
                              spec.out_channels);
        std::vector<double> b(static_cast<size_t>(spec.out_channels));
        for (auto& v : in) v = rng.uniform(-1, 1);
        for (auto& v : w) v = rng.uniform(-1, 1);
        const size_t out_n = static_cast<size_t>(g.out_h) * g.out_w * g.out_c;
        std::vector<double> out_s(out_n), out_p(out_n);

        report("conv2d forward 32x32x64",
               bench([&] { kernels::serial::conv2d_forward(g, in.data(), w.data(), b.data(),
                                                           out_s.data()); },
                     [&] { kernels::omp::conv2d_forward(g, in.data(), w.data(), b.data(),
                                                        out_p.data()); },
                     [&] {
                         return std::memcmp(out_s.data(), out_p.data(),
                                            out_n * sizeof(double)) == 0;
                     },
                     10));

        std::vector<double> gw_s(w.size()), gw_p(w.size()), gb_s(b.size()), gb_p(b.size());
        std::vector<double> gin_s(in.size()), gin_p(in.size());
        report("conv2d backward 32x32x64",
               bench(
                   [&] {
                       std::fill(gw_s.begin(), gw_s.end(), 0.0);
                       std::fill(gb_s.begin(), gb_s.end(), 0.0);
                       kernels::serial::conv2d_backward_params(g, in.data(), out_s.data(),
                                                               gw_s.data(), gb_s.data());
                       kernels::serial::conv2d_backward_input(g, out_s.data(), w.data(),
                                                              gin_s.data());
                   },
                   [&] {
                       std::fill(gw_p.begin(), gw_p.end(), 0.0);
                       std::fill(gb_p.begin(), gb_p.end(), 0.0);
                       kernels::omp::conv2d_backward_params(g, in.data(), out_s.data(),
                                                            gw_p.data(), gb_p.data());
                       kernels::omp::conv2d_backward_input(g, out_s.data(), w.data(),
                                                           gin_p.data());
                   },
                   [&] {
                       return std::memcmp(gw_s.data(), gw_p.data(), gw_s.size() * 8) == 0 &&
                              std::memcmp(gin_s.data(), gin_p.data(), gin_s.size() * 8) == 0;
                   },
                   5));
    }

    {
        // fc 4096 -> 1024
        const int in_n = 4096, out_n = 1024;
        std::vector<double> in(in_n), w(static_cast<size_t>(in_n) * out_n), b(out_n);
        for (auto& v : in) v = rng.uniform(-1, 1);
        for (auto& v : w) v = rng.uniform(-1, 1);
        std::vector<double> out_s(out_n), out_p(out_n);
        report("fc forward 4096->1024",
               bench([&] { kernels::serial::fc_forward(in_n, out_n, in.data(), w.data(), b.data(),
                                                       out_s.data()); },
                     [&] { kernels::omp::fc_forward(in_n, out_n, in.data(), w.data(), b.data(),
                                                    out_p.data()); },
                     [&] {
                         return std::memcmp(out_s.data(), out_p.data(),
                                            sizeof(double) * out_n) == 0;
                     },
                     20));
    }

    {
        // end-to-end forward on a mid-size conv net
        auto arch = nnsteal::attack::fixed_width_arch(8, 32, 3, Shape{32, 32, 3}, 10);
        auto net = init_network(arch, 7);
        Tensor input(arch.input_shape);
        for (auto& v : input.data) v = rng.uniform();
        std::vector<double> post_s, post_p;
        report("network forward d8 f32",
               bench([&] { post_s = forward(net, input, Backend::Serial); },
                     [&] { post_p = forward(net, input, Backend::OpenMP); },
                     [&] {
                         return std::memcmp(post_s.data(), post_p.data(),
                                            post_s.size() * sizeof(double)) == 0;
                     },
                     10));
    }
    return 0;
}
