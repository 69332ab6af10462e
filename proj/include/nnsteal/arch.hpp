#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nnsteal/tensor.hpp"

namespace nnsteal::nn {

enum class Padding { Same, Valid };
enum class ActKind { Relu, Softmax };

struct Conv2DSpec {
    int out_channels = 1;
    int kernel = 1;
    int stride = 1;
    Padding padding = Padding::Same;
    bool operator==(const Conv2DSpec&) const = default;
};

struct MaxPoolSpec {
    int kernel = 2;
    int stride = 2;
    bool operator==(const MaxPoolSpec&) const = default;
};

struct FullyConnectedSpec {
    int in_features = 1;
    int out_features = 1;
    bool operator==(const FullyConnectedSpec&) const = default;
};

struct GlobalAvgPoolSpec {
    bool operator==(const GlobalAvgPoolSpec&) const = default;
};

struct FlattenSpec {
    bool operator==(const FlattenSpec&) const = default;
};

struct ActivationSpec {
    ActKind kind = ActKind::Relu;
    bool operator==(const ActivationSpec&) const = default;
};

using LayerSpec = std::variant<Conv2DSpec, MaxPoolSpec, FullyConnectedSpec,
                               GlobalAvgPoolSpec, FlattenSpec, ActivationSpec>;

// Ordered layer list plus input shape and class count; the unit of search,
// timing and training.
struct ArchitectureSpec {
    Shape input_shape;
    std::vector<LayerSpec> layers;
    int num_classes = 0;

    bool operator==(const ArchitectureSpec&) const = default;
};

// Validation failures carry the index of the first offending layer
// (-1 when the problem is not tied to a specific layer).
class ValidationError : public std::runtime_error {
public:
    ValidationError(int layer_index, const std::string& msg)
        : std::runtime_error(msg), layer_index_(layer_index) {}
    int layer_index() const { return layer_index_; }

private:
    int layer_index_;
};

// Output shape of a single layer. Throws ValidationError on bad parameters
// or an input the layer cannot consume.
Shape layer_output_shape(const LayerSpec& layer, const Shape& in, int layer_index);

// Per-layer output shapes, front to back. Throws on the first failure.
std::vector<Shape> propagate_shapes(const ArchitectureSpec& arch);

// Structural validation: layer parameters and shape propagation.
void validate(const ArchitectureSpec& arch);

// Additionally requires the final output to be a vector of num_classes
// entries, i.e. the network can be run as a classifier.
void validate_for_inference(const ArchitectureSpec& arch);

// Depth convention: the number of Conv2D and MaxPool layers. The classifier
// head (GAP / Flatten / FC / activations) is not counted; this reproduces
// the depth labels of the VGG-style architecture family used throughout.
int depth(const ArchitectureSpec& arch);

// Total learnable parameters (weights + biases).
int64_t param_count(const ArchitectureSpec& arch);

struct OpCounts {
    int64_t multiplications = 0;  // conv + fc multiply count
    int64_t comparisons = 0;      // maxpool comparison count (o_w*o_h*c*k*k)
};

OpCounts op_counts(const ArchitectureSpec& arch);
int64_t multiplication_count(const ArchitectureSpec& arch);

// JSON form: {"input_shape":[h,w,c], "num_classes":n, "layers":[...]}
nlohmann::json arch_to_json(const ArchitectureSpec& arch);
ArchitectureSpec arch_from_json(const nlohmann::json& j);
std::string arch_to_string(const ArchitectureSpec& arch);
ArchitectureSpec arch_from_string(const std::string& s);

}  // namespace nnsteal::nn
