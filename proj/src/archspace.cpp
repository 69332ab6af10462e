#include "nnsteal/archspace.hpp"

#include <stdexcept>

#include "nnsteal/rng.hpp"

namespace nnsteal::attack {

void ArchSpace::validate() const {
    if (depth_min < 1 || depth_max < depth_min)
        throw std::invalid_argument("arch space: depth range must satisfy 1 <= min <= max");
    if (kernel_choices.empty() || filter_choices.empty())
        throw std::invalid_argument("arch space: choice sets must be non-empty");
    for (int k : kernel_choices)
        if (k < 1) throw std::invalid_argument("arch space: kernel choices must be >= 1");
    for (int f : filter_choices)
        if (f < 1) throw std::invalid_argument("arch space: filter choices must be >= 1");
}

nn::ArchitectureSpec sample_random_architecture(const ArchSpace& space, uint64_t seed) {
    space.validate();
    Rng rng(seed);
    const int d = space.depth_min +
                  static_cast<int>(rng.uniform_int(
                      static_cast<uint64_t>(space.depth_max - space.depth_min + 1)));

    nn::ArchitectureSpec arch;
    arch.input_shape = space.input_shape;
    arch.num_classes = space.num_classes;

    int spatial = std::min(space.input_shape.h, space.input_shape.w);
    int channels = space.input_shape.c;
    int counted = 0;
    int convs_since_pool = 0;
    while (counted < d) {
        if (convs_since_pool >= space.pool_every && spatial / 2 >= space.min_spatial) {
            arch.layers.emplace_back(nn::MaxPoolSpec{2, 2});
            spatial /= 2;
            convs_since_pool = 0;
        } else {
            const int kernel = space.kernel_choices[rng.uniform_int(space.kernel_choices.size())];
            const int filters = space.filter_choices[rng.uniform_int(space.filter_choices.size())];
            arch.layers.emplace_back(nn::Conv2DSpec{filters, kernel, 1, nn::Padding::Same});
            arch.layers.emplace_back(nn::ActivationSpec{nn::ActKind::Relu});
            channels = filters;
            ++convs_since_pool;
        }
        ++counted;
    }
    arch.layers.emplace_back(nn::GlobalAvgPoolSpec{});
    arch.layers.emplace_back(nn::FullyConnectedSpec{channels, space.num_classes});
    return arch;
}

nn::ArchitectureSpec fixed_width_arch(int depth, int filters, int kernel, Shape input_shape,
                                      int num_classes) {
    if (depth < 1) throw std::invalid_argument("fixed_width_arch: depth must be >= 1");
    nn::ArchitectureSpec arch;
    arch.input_shape = input_shape;
    arch.num_classes = num_classes;
    for (int i = 0; i < depth; ++i) {
        arch.layers.emplace_back(nn::Conv2DSpec{filters, kernel, 1, nn::Padding::Same});
        arch.layers.emplace_back(nn::ActivationSpec{nn::ActKind::Relu});
    }
    arch.layers.emplace_back(nn::GlobalAvgPoolSpec{});
    arch.layers.emplace_back(nn::FullyConnectedSpec{filters, num_classes});
    return arch;
}

nn::ArchitectureSpec vgg_style_target(int which, Shape input_shape, int num_classes) {
    // filter counts per conv block; -1 marks a maxpool
    static const std::vector<std::vector<int>> plans = {
        {32, 32, -1, 64, 64, -1, 128, 128, -1},
        {32, 32, -1, 64, 64, -1, 128, 128, -1, 256, -1},
        {32, 32, -1, 64, 64, -1, 128, 128, 128, -1, 256, 256, -1},
    };
    if (which < 1 || which > 3)
        throw std::invalid_argument("vgg_style_target: which must be 1, 2 or 3");

    nn::ArchitectureSpec arch;
    arch.input_shape = input_shape;
    arch.num_classes = num_classes;
    int channels = input_shape.c;
    for (int f : plans[static_cast<size_t>(which - 1)]) {
        if (f < 0) {
            arch.layers.emplace_back(nn::MaxPoolSpec{2, 2});
        } else {
            arch.layers.emplace_back(nn::Conv2DSpec{f, 3, 1, nn::Padding::Same});
            arch.layers.emplace_back(nn::ActivationSpec{nn::ActKind::Relu});
            channels = f;
        }
    }
    arch.layers.emplace_back(nn::GlobalAvgPoolSpec{});
    arch.layers.emplace_back(nn::FullyConnectedSpec{channels, num_classes});
    return arch;
}

}  // namespace nnsteal::attack
