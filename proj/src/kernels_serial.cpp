#include <algorithm>
#include <cmath>
#include <cstring>

#include "nnsteal/kernels.hpp"

namespace nnsteal::nn {

ConvGeom make_conv_geom(const Shape& in, const Conv2DSpec& spec) {
    ConvGeom g;
    g.in_h = in.h;
    g.in_w = in.w;
    g.in_c = in.c;
    g.kernel = spec.kernel;
    g.stride = spec.stride;
    g.out_c = spec.out_channels;
    if (spec.padding == Padding::Same) {
        g.out_h = (in.h + spec.stride - 1) / spec.stride;
        g.out_w = (in.w + spec.stride - 1) / spec.stride;
        const int pad_h = std::max((g.out_h - 1) * spec.stride + spec.kernel - in.h, 0);
        const int pad_w = std::max((g.out_w - 1) * spec.stride + spec.kernel - in.w, 0);
        g.pad_top = pad_h / 2;
        g.pad_left = pad_w / 2;
    } else {
        g.out_h = (in.h - spec.kernel) / spec.stride + 1;
        g.out_w = (in.w - spec.kernel) / spec.stride + 1;
        g.pad_top = 0;
        g.pad_left = 0;
    }
    return g;
}

namespace kernels {

// Weight layout: w[((fy*k + fx)*in_c + ci)*out_c + co], input/output are
// (y*w + x)*c + c row-major.

namespace serial {

void conv2d_forward(const ConvGeom& g, const double* in, const double* w, const double* b,
                    double* out) {
    for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox)
            for (int co = 0; co < g.out_c; ++co) {
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
                out[(static_cast<size_t>(oy) * g.out_w + ox) * g.out_c + co] = acc;
            }
}

void conv2d_backward_input(const ConvGeom& g, const double* grad_out, const double* w,
                           double* grad_in) {
    for (int iy = 0; iy < g.in_h; ++iy)
        for (int ix = 0; ix < g.in_w; ++ix)
            for (int ci = 0; ci < g.in_c; ++ci) {
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
                        const double* go =
                            grad_out + (static_cast<size_t>(oy) * g.out_w + ox) * g.out_c;
                        const double* w_px =
                            w + ((static_cast<size_t>(fy) * g.kernel + fx) * g.in_c + ci) * g.out_c;
                        for (int co = 0; co < g.out_c; ++co) acc += go[co] * w_px[co];
                    }
                }
                grad_in[(static_cast<size_t>(iy) * g.in_w + ix) * g.in_c + ci] = acc;
            }
}

void conv2d_backward_params(const ConvGeom& g, const double* in, const double* grad_out,
                            double* grad_w, double* grad_b) {
    for (int fy = 0; fy < g.kernel; ++fy)
        for (int fx = 0; fx < g.kernel; ++fx)
            for (int ci = 0; ci < g.in_c; ++ci)
                for (int co = 0; co < g.out_c; ++co) {
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
                    grad_w[((static_cast<size_t>(fy) * g.kernel + fx) * g.in_c + ci) * g.out_c +
                           co] += acc;
                }
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
    for (int o = 0; o < out_n; ++o) {
        double acc = b[o];
        for (int i = 0; i < in_n; ++i) acc += in[i] * w[static_cast<size_t>(i) * out_n + o];
        out[o] = acc;
    }
}

void fc_backward_input(int in_n, int out_n, const double* grad_out, const double* w,
                       double* grad_in) {
    for (int i = 0; i < in_n; ++i) {
        double acc = 0.0;
        const double* w_row = w + static_cast<size_t>(i) * out_n;
        for (int o = 0; o < out_n; ++o) acc += grad_out[o] * w_row[o];
        grad_in[i] = acc;
    }
}

void fc_backward_params(int in_n, int out_n, const double* in, const double* grad_out,
                        double* grad_w, double* grad_b) {
    for (int i = 0; i < in_n; ++i) {
        double* gw_row = grad_w + static_cast<size_t>(i) * out_n;
        const double v = in[i];
        for (int o = 0; o < out_n; ++o) gw_row[o] += v * grad_out[o];
    }
    for (int o = 0; o < out_n; ++o) grad_b[o] += grad_out[o];
}

}  // namespace serial

void maxpool_forward(const Shape& in_shape, const MaxPoolSpec& spec, const double* in, double* out,
                     int* argmax, Shape out_shape) {
    for (int oy = 0; oy < out_shape.h; ++oy)
        for (int ox = 0; ox < out_shape.w; ++ox)
            for (int c = 0; c < in_shape.c; ++c) {
                double best = -std::numeric_limits<double>::infinity();
                int best_idx = -1;
                for (int fy = 0; fy < spec.kernel; ++fy)
                    for (int fx = 0; fx < spec.kernel; ++fx) {
                        const int iy = oy * spec.stride + fy;
                        const int ix = ox * spec.stride + fx;
                        const int idx =
                            (iy * in_shape.w + ix) * in_shape.c + c;
                        if (in[idx] > best) {
                            best = in[idx];
                            best_idx = idx;
                        }
                    }
                const size_t oidx = (static_cast<size_t>(oy) * out_shape.w + ox) * in_shape.c + c;
                out[oidx] = best;
                argmax[oidx] = best_idx;
            }
}

void maxpool_backward(const Shape& in_shape, const double* grad_out, const int* argmax,
                      int64_t out_size, double* grad_in) {
    std::memset(grad_in, 0, sizeof(double) * static_cast<size_t>(in_shape.size()));
    for (int64_t i = 0; i < out_size; ++i) grad_in[argmax[i]] += grad_out[i];
}

void gap_forward(const Shape& in_shape, const double* in, double* out) {
    const int64_t hw = int64_t(in_shape.h) * in_shape.w;
    for (int c = 0; c < in_shape.c; ++c) {
        double acc = 0.0;
        for (int64_t p = 0; p < hw; ++p) acc += in[p * in_shape.c + c];
        out[c] = acc / static_cast<double>(hw);
    }
}

void gap_backward(const Shape& in_shape, const double* grad_out, double* grad_in) {
    const int64_t hw = int64_t(in_shape.h) * in_shape.w;
    for (int64_t p = 0; p < hw; ++p)
        for (int c = 0; c < in_shape.c; ++c)
            grad_in[p * in_shape.c + c] = grad_out[c] / static_cast<double>(hw);
}

void relu_forward(int64_t n, const double* in, double* out) {
    for (int64_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(int64_t n, const double* in, const double* grad_out, double* grad_in) {
    for (int64_t i = 0; i < n; ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
}

void softmax(int64_t n, const double* in, double* out) {
    double m = in[0];
    for (int64_t i = 1; i < n; ++i) m = std::max(m, in[i]);
    double sum = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        out[i] = std::exp(in[i] - m);
        sum += out[i];
    }
    for (int64_t i = 0; i < n; ++i) out[i] /= sum;
}

void softmax_backward(int64_t n, const double* p, const double* grad_p, double* grad_z) {
    double dot = 0.0;
    for (int64_t i = 0; i < n; ++i) dot += grad_p[i] * p[i];
    for (int64_t i = 0; i < n; ++i) grad_z[i] = p[i] * (grad_p[i] - dot);
}

}  // namespace kernels
}  // namespace nnsteal::nn
