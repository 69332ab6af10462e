#include "nnsteal/arch.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace nnsteal::nn {

namespace {

int conv_output_dim(int in, int kernel, int stride, Padding padding) {
    if (padding == Padding::Same) {
        return (in + stride - 1) / stride;  // ceil(in / stride)
    }
    return (in - kernel) / stride + 1;
}

}  // namespace

Shape layer_output_shape(const LayerSpec& layer, const Shape& in, int layer_index) {
    if (std::holds_alternative<Conv2DSpec>(layer)) {
        const auto& c = std::get<Conv2DSpec>(layer);
        if (c.kernel < 1 || c.stride < 1 || c.out_channels < 1)
            throw ValidationError(layer_index, "conv layer " + std::to_string(layer_index) +
                                                   ": kernel, stride and out_channels must be >= 1");
        if (c.padding == Padding::Valid && (in.h < c.kernel || in.w < c.kernel))
            throw ValidationError(layer_index, "conv layer " + std::to_string(layer_index) +
                                                   ": valid padding needs input >= kernel");
        Shape out{conv_output_dim(in.h, c.kernel, c.stride, c.padding),
                  conv_output_dim(in.w, c.kernel, c.stride, c.padding), c.out_channels};
        if (out.h < 1 || out.w < 1)
            throw ValidationError(layer_index, "conv layer " + std::to_string(layer_index) +
                                                   ": output has non-positive spatial dims");
        return out;
    }
    if (std::holds_alternative<MaxPoolSpec>(layer)) {
        const auto& p = std::get<MaxPoolSpec>(layer);
        if (p.kernel < 1 || p.stride < 1)
            throw ValidationError(layer_index, "maxpool layer " + std::to_string(layer_index) +
                                                   ": kernel and stride must be >= 1");
        if (in.h < p.kernel || in.w < p.kernel)
            throw ValidationError(layer_index, "maxpool layer " + std::to_string(layer_index) +
                                                   ": input smaller than pooling window");
        return Shape{(in.h - p.kernel) / p.stride + 1, (in.w - p.kernel) / p.stride + 1, in.c};
    }
    if (std::holds_alternative<FullyConnectedSpec>(layer)) {
        const auto& f = std::get<FullyConnectedSpec>(layer);
        if (f.in_features < 1 || f.out_features < 1)
            throw ValidationError(layer_index, "fc layer " + std::to_string(layer_index) +
                                                   ": feature counts must be >= 1");
        if (in.size() != f.in_features)
            throw ValidationError(layer_index, "fc layer " + std::to_string(layer_index) +
                                                   ": expects " + std::to_string(f.in_features) +
                                                   " inputs, got " + std::to_string(in.size()));
        return Shape{1, 1, f.out_features};
    }
    if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
        return Shape{1, 1, in.c};
    }
    if (std::holds_alternative<FlattenSpec>(layer)) {
        return Shape{1, 1, static_cast<int>(in.size())};
    }
    // activation
    return in;
}

std::vector<Shape> propagate_shapes(const ArchitectureSpec& arch) {
    if (arch.input_shape.h < 1 || arch.input_shape.w < 1 || arch.input_shape.c < 1)
        throw ValidationError(-1, "input shape must be positive in every dimension");
    std::vector<Shape> out;
    out.reserve(arch.layers.size());
    Shape cur = arch.input_shape;
    for (size_t i = 0; i < arch.layers.size(); ++i) {
        cur = layer_output_shape(arch.layers[i], cur, static_cast<int>(i));
        out.push_back(cur);
    }
    return out;
}

void validate(const ArchitectureSpec& arch) { propagate_shapes(arch); }

void validate_for_inference(const ArchitectureSpec& arch) {
    auto shapes = propagate_shapes(arch);
    Shape final_shape = shapes.empty() ? arch.input_shape : shapes.back();
    if (arch.num_classes < 1)
        throw ValidationError(-1, "num_classes must be >= 1");
    if (final_shape.size() != arch.num_classes)
        throw ValidationError(static_cast<int>(arch.layers.size()) - 1,
                              "final output length " + std::to_string(final_shape.size()) +
                                  " != num_classes " + std::to_string(arch.num_classes));
}

int depth(const ArchitectureSpec& arch) {
    int d = 0;
    for (const auto& l : arch.layers)
        if (std::holds_alternative<Conv2DSpec>(l) || std::holds_alternative<MaxPoolSpec>(l)) ++d;
    return d;
}

int64_t param_count(const ArchitectureSpec& arch) {
    auto shapes = propagate_shapes(arch);
    int64_t total = 0;
    Shape in = arch.input_shape;
    for (size_t i = 0; i < arch.layers.size(); ++i) {
        const auto& l = arch.layers[i];
        if (std::holds_alternative<Conv2DSpec>(l)) {
            const auto& c = std::get<Conv2DSpec>(l);
            total += int64_t(c.kernel) * c.kernel * in.c * c.out_channels + c.out_channels;
        } else if (std::holds_alternative<FullyConnectedSpec>(l)) {
            const auto& f = std::get<FullyConnectedSpec>(l);
            total += int64_t(f.in_features) * f.out_features + f.out_features;
        }
        in = shapes[i];
    }
    return total;
}

OpCounts op_counts(const ArchitectureSpec& arch) {
    auto shapes = propagate_shapes(arch);
    OpCounts counts;
    Shape in = arch.input_shape;
    for (size_t i = 0; i < arch.layers.size(); ++i) {
        const auto& l = arch.layers[i];
        const Shape& out = shapes[i];
        if (std::holds_alternative<Conv2DSpec>(l)) {
            const auto& c = std::get<Conv2DSpec>(l);
            counts.multiplications +=
                int64_t(out.w) * out.h * c.out_channels * c.kernel * c.kernel * in.c;
        } else if (std::holds_alternative<FullyConnectedSpec>(l)) {
            const auto& f = std::get<FullyConnectedSpec>(l);
            counts.multiplications += int64_t(f.in_features) * f.out_features;
        } else if (std::holds_alternative<MaxPoolSpec>(l)) {
            const auto& p = std::get<MaxPoolSpec>(l);
            counts.comparisons += int64_t(out.w) * out.h * out.c * p.kernel * p.kernel;
        }
        in = out;
    }
    return counts;
}

int64_t multiplication_count(const ArchitectureSpec& arch) {
    return op_counts(arch).multiplications;
}

nlohmann::json arch_to_json(const ArchitectureSpec& arch) {
    nlohmann::json j;
    j["input_shape"] = {arch.input_shape.h, arch.input_shape.w, arch.input_shape.c};
    j["num_classes"] = arch.num_classes;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : arch.layers) {
        nlohmann::json jl;
        if (const auto* c = std::get_if<Conv2DSpec>(&l)) {
            jl["type"] = "conv";
            jl["filters"] = c->out_channels;
            jl["kernel"] = c->kernel;
            jl["stride"] = c->stride;
            jl["padding"] = c->padding == Padding::Same ? "same" : "valid";
        } else if (const auto* p = std::get_if<MaxPoolSpec>(&l)) {
            jl["type"] = "maxpool";
            jl["kernel"] = p->kernel;
            jl["stride"] = p->stride;
        } else if (const auto* f = std::get_if<FullyConnectedSpec>(&l)) {
            jl["type"] = "fc";
            jl["in"] = f->in_features;
            jl["out"] = f->out_features;
        } else if (std::holds_alternative<GlobalAvgPoolSpec>(l)) {
            jl["type"] = "gap";
        } else if (std::holds_alternative<FlattenSpec>(l)) {
            jl["type"] = "flatten";
        } else {
            jl["type"] = "activation";
            jl["kind"] = std::get<ActivationSpec>(l).kind == ActKind::Relu ? "relu" : "softmax";
        }
        layers.push_back(jl);
    }
    j["layers"] = layers;
    return j;
}

ArchitectureSpec arch_from_json(const nlohmann::json& j) {
    ArchitectureSpec arch;
    const auto& in = j.at("input_shape");
    arch.input_shape = Shape{in.at(0).get<int>(), in.at(1).get<int>(), in.at(2).get<int>()};
    arch.num_classes = j.at("num_classes").get<int>();
    for (const auto& jl : j.at("layers")) {
        const std::string type = jl.at("type").get<std::string>();
        if (type == "conv") {
            Conv2DSpec c;
            c.out_channels = jl.at("filters").get<int>();
            c.kernel = jl.at("kernel").get<int>();
            c.stride = jl.value("stride", 1);
            c.padding = jl.value("padding", std::string("same")) == "valid" ? Padding::Valid
                                                                            : Padding::Same;
            arch.layers.emplace_back(c);
        } else if (type == "maxpool") {
            MaxPoolSpec p;
            p.kernel = jl.at("kernel").get<int>();
            p.stride = jl.value("stride", p.kernel);
            arch.layers.emplace_back(p);
        } else if (type == "fc") {
            FullyConnectedSpec f;
            f.in_features = jl.at("in").get<int>();
            f.out_features = jl.at("out").get<int>();
            arch.layers.emplace_back(f);
        } else if (type == "gap") {
            arch.layers.emplace_back(GlobalAvgPoolSpec{});
        } else if (type == "flatten") {
            arch.layers.emplace_back(FlattenSpec{});
        } else if (type == "activation") {
            ActivationSpec a;
            a.kind = jl.at("kind").get<std::string>() == "softmax" ? ActKind::Softmax : ActKind::Relu;
            arch.layers.emplace_back(a);
        } else {
            throw ValidationError(-1, "unknown layer type '" + type + "'");
        }
    }
    return arch;
}

std::string arch_to_string(const ArchitectureSpec& arch) { return arch_to_json(arch).dump(); }

ArchitectureSpec arch_from_string(const std::string& s) {
    return arch_from_json(nlohmann::json::parse(s));
}

}  // namespace nnsteal::nn
