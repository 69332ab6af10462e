#include "nnsteal/kernels.hpp"

// OpenMP twins of the serial conv/fc kernels. Each parallel loop ranges over
// independent output elements; per-element accumulation order matches the
// serial reference exactly, so results are bitwise identical.

namespace nnsteal::nn::kernels::omp {

void conv2d_forward(const ConvGeom& g, const double* in, const double* w, const double* b,
                    double* out) {
    const int64_t total = int64_t(g.out_h) * g.out_w * g.out_c;
#pragma omp parallel for schedule(static)
    for (int64_t idx = 0; idx < total; ++idx) {
        const int co = static_cast<int>(idx % g.out_c);
        const int ox = static_cast<int>((idx / g.out_c) % g.out_w);
        const int oy = static_cast<int>(idx / (int64_t(g.out_c) * g.out_w));
        double acc = b[co];
        const int iy0 = oy * g.stride - g.pad_top;
        const int ix0 = ox * g.stride - g.pad_left;
        for (int fy = 0; fy < g.kernel; ++fy) {
            const int iy = iy0 + fy;
            if (iy < 0 || iy >= g.in_h) continue;
            for (int fx = 0; fx < g.kernel; ++fx) {
                const int ix = ix0 + fx;
                if (ix < 0 || ix >= g.in_w) continue;
                const double* in_px = in + (static_cast<size_t>(iy) * g.in_w + ix) * g.in_c;
                const double* w_px =
                    w + (static_cast<size_t>(fy) * g.kernel + fx) * g.in_c * g.out_c + co;
                for (int ci = 0; ci < g.in_c; ++ci)
                    acc += in_px[ci] * w_px[static_cast<size_t>(ci) * g.out_c];
            }
        }
        out[idx] = acc;
    }
}

void conv2d_backward_input(const ConvGeom& g, const double* grad_out, const double* w,
                           double* grad_in) {
    const int64_t total = int64_t(g.in_h) * g.in_w * g.in_c;
#pragma omp parallel for schedule(static)
    for (int64_t idx = 0; idx < total; ++idx) {
        const int ci = static_cast<int>(idx % g.in_c);
        const int ix = static_cast<int>((idx / g.in_c) % g.in_w);
        const int iy = static_cast<int>(idx / (int64_t(g.in_c) * g.in_w));
        double acc = 0.0;
        for (int fy = 0; fy < g.kernel; ++fy) {
            const int num = iy + g.pad_top - fy;
            if (num < 0 || num % g.stride != 0) continue;
            const int oy = num / g.stride;
            if (oy >= g.out_h) continue;
            for (int fx = 0; fx < g.kernel; ++fx) {
                const int numx = ix + g.pad_left - fx;
                if (numx < 0 || numx % g.stride != 0) continue;
                const int ox = numx / g.stride;
                if (ox >= g.out_w) continue;
                const double* go = grad_out + (static_cast<size_t>(oy) * g.out_w + ox) * g.out_c;
                const double* w_px =
                    w + ((static_cast<size_t>(fy) * g.kernel + fx) * g.in_c + ci) * g.out_c;
                for (int co = 0; co < g.out_c; ++co) acc += go[co] * w_px[co];
            }
        }
        grad_in[idx] = acc;
    }
}

void conv2d_backward_params(const ConvGeom& g, const double* in, const double* grad_out,
                            double* grad_w, double* grad_b) {
    const int64_t total = int64_t(g.kernel) * g.kernel * g.in_c * g.out_c;
#pragma omp parallel for schedule(static)
    for (int64_t widx = 0; widx < total; ++widx) {
        const int co = static_cast<int>(widx % g.out_c);
        const int ci = static_cast<int>((widx / g.out_c) % g.in_c);
        const int fx = static_cast<int>((widx / (int64_t(g.out_c) * g.in_c)) % g.kernel);
        const int fy = static_cast<int>(widx / (int64_t(g.out_c) * g.in_c * g.kernel));
        double acc = 0.0;
        for (int oy = 0; oy < g.out_h; ++oy) {
            const int iy = oy * g.stride - g.pad_top + fy;
            if (iy < 0 || iy >= g.in_h) continue;
            for (int ox = 0; ox < g.out_w; ++ox) {
                const int ix = ox * g.stride - g.pad_left + fx;
                if (ix < 0 || ix >= g.in_w) continue;
                acc += in[(static_cast<size_t>(iy) * g.in_w + ix) * g.in_c + ci] *
                       grad_out[(static_cast<size_t>(oy) * g.out_w + ox) * g.out_c + co];
            }
        }
        grad_w[widx] += acc;
    }
#pragma omp parallel for schedule(static)
    for (int co = 0; co < g.out_c; ++co) {
        double acc = 0.0;
        for (int oy = 0; oy < g.out_h; ++oy)
            for (int ox = 0; ox < g.out_w; ++ox)
                acc += grad_out[(static_cast<size_t>(oy) * g.out_w + ox) * g.out_c + co];
        grad_b[co] += acc;
    }
}

void fc_forward(int in_n, int out_n, const double* in, const double* w, const double* b,
                double* out) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_n; ++o) {
        double acc = b[o];
        for (int i = 0; i < in_n; ++i) acc += in[i] * w[static_cast<size_t>(i) * out_n + o];
        out[o] = acc;
    }
}

void fc_backward_input(int in_n, int out_n, const double* grad_out, const double* w,
                       double* grad_in) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_n; ++i) {
        double acc = 0.0;
        const double* w_row = w + static_cast<size_t>(i) * out_n;
        for (int o = 0; o < out_n; ++o) acc += grad_out[o] * w_row[o];
        grad_in[i] = acc;
    }
}

void fc_backward_params(int in_n, int out_n, const double* in, const double* grad_out,
                        double* grad_w, double* grad_b) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_n; ++i) {
        double* gw_row = grad_w + static_cast<size_t>(i) * out_n;
        const double v = in[i];
        for (int o = 0; o < out_n; ++o) gw_row[o] += v * grad_out[o];
    }
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_n; ++o) grad_b[o] += grad_out[o];
}

}  // namespace nnsteal::nn::kernels::omp
