#pragma once

#include <cstdint>
#include <vector>

namespace nnsteal {

// Spatial shape (height, width, channels). Vectors are represented as
// (1, 1, n). Layout is row-major with channels innermost:
// index(y, x, c) = (y * w + x) * ch + c.
struct Shape {
    int h = 1;
    int w = 1;
    int c = 1;

    int64_t size() const { return int64_t(h) * w * c; }
    bool operator==(const Shape&) const = default;
};

struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(s), data(static_cast<size_t>(s.size()), 0.0) {}
    Tensor(Shape s, std::vector<double> d) : shape(s), data(std::move(d)) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * shape.w + x) * shape.c + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * shape.w + x) * shape.c + c];
    }
};

}  // namespace nnsteal
