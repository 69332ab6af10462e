#pragma once

#include "nnsteal/arch.hpp"
#include "nnsteal/tensor.hpp"

// Layer compute kernels. Conv and FC exist in two flavors: a serial
// reference (namespace serial) and an OpenMP variant (namespace omp).
// The OpenMP kernels parallelize over independent output (or gradient)
// elements and keep each element's accumulation order identical to the
// serial reference, so the two produce bitwise-identical results for any
// thread count. Pooling, GAP and activations are cheap and shared.

namespace nnsteal::nn {

enum class Backend { Serial, OpenMP };

struct ConvGeom {
    int in_h, in_w, in_c;
    int out_h, out_w, out_c;
    int kernel, stride;
    int pad_top, pad_left;
};

ConvGeom make_conv_geom(const Shape& in, const Conv2DSpec& spec);

namespace kernels {

namespace serial {
void conv2d_forward(const ConvGeom& g, const double* in, const double* w, const double* b,
                    double* out);
void conv2d_backward_input(const ConvGeom& g, const double* grad_out, const double* w,
                           double* grad_in);
void conv2d_backward_params(const ConvGeom& g, const double* in, const double* grad_out,
                            double* grad_w, double* grad_b);
void fc_forward(int in_n, int out_n, const double* in, const double* w, const double* b,
                double* out);
void fc_backward_input(int in_n, int out_n, const double* grad_out, const double* w,
                       double* grad_in);
void fc_backward_params(int in_n, int out_n, const double* in, const double* grad_out,
                        double* grad_w, double* grad_b);
}  // namespace serial

namespace omp {
void conv2d_forward(const ConvGeom& g, const double* in, const double* w, const double* b,
                    double* out);
void conv2d_backward_input(const ConvGeom& g, const double* grad_out, const double* w,
                           double* grad_in);
void conv2d_backward_params(const ConvGeom& g, const double* in, const double* grad_out,
                            double* grad_w, double* grad_b);
void fc_forward(int in_n, int out_n, const double* in, const double* w, const double* b,
                double* out);
void fc_backward_input(int in_n, int out_n, const double* grad_out, const double* w,
                       double* grad_in);
void fc_backward_params(int in_n, int out_n, const double* in, const double* grad_out,
                        double* grad_w, double* grad_b);
}  // namespace omp

// Shared single-implementation kernels.
void maxpool_forward(const Shape& in_shape, const MaxPoolSpec& spec, const double* in, double* out,
                     int* argmax, Shape out_shape);
void maxpool_backward(const Shape& in_shape, const double* grad_out, const int* argmax,
                      int64_t out_size, double* grad_in);
void gap_forward(const Shape& in_shape, const double* in, double* out);
void gap_backward(const Shape& in_shape, const double* grad_out, double* grad_in);
void relu_forward(int64_t n, const double* in, double* out);
void relu_backward(int64_t n, const double* in, const double* grad_out, double* grad_in);
void softmax(int64_t n, const double* in, double* out);
// grad through softmax given dL/dp and p
void softmax_backward(int64_t n, const double* p, const double* grad_p, double* grad_z);

}  // namespace kernels

}  // namespace nnsteal::nn
