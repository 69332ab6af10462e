#pragma once

#include <vector>

#include "nnsteal/arch.hpp"

namespace nnsteal::attack {

// Constrained family of VGG-style architectures: stacks of same-padded
// stride-1 convolutions with a MaxPool inserted after every pool_every-th
// conv while the spatial extent stays above min_spatial, closed by
// GAP + fully-connected classifier.
struct ArchSpace {
    int depth_min = 5;
    int depth_max = 24;
    std::vector<int> kernel_choices{3, 5};
    std::vector<int> filter_choices{32, 64, 128};
    int pool_every = 2;
    int min_spatial = 4;
    Shape input_shape{32, 32, 3};
    int num_classes = 10;

    void validate() const;
};

// Uniform draw from the space: depth uniform over [depth_min, depth_max],
// kernel/filters per conv uniform over the choice sets. Deterministic in the
// seed. The generated spec always ends with a classifier layer.
nn::ArchitectureSpec sample_random_architecture(const ArchSpace& space, uint64_t seed);

// Same family at a fixed depth and fixed per-layer size; used for depth
// sweeps where exact affine timing in depth is wanted (no pooling, constant
// spatial extent).
nn::ArchitectureSpec fixed_width_arch(int depth, int filters, int kernel, Shape input_shape,
                                      int num_classes);

// The three VGG-style evaluation targets (conv counts 6/7/9 with 3/4/4
// maxpools -> depths 9/11/13), closed by GAP + classifier.
nn::ArchitectureSpec vgg_style_target(int which, Shape input_shape, int num_classes);

}  // namespace nnsteal::attack
