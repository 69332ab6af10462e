#include "nnsteal/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nnsteal/rng.hpp"

namespace nnsteal::nn {

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool is_softmax(const LayerSpec& l) {
    const auto* a = std::get_if<ActivationSpec>(&l);
    return a && a->kind == ActKind::Softmax;
}

}  // namespace

int64_t TrainedNetwork::total_params() const {
    int64_t n = 0;
    for (const auto& p : params) n += static_cast<int64_t>(p.w.size() + p.b.size());
    return n;
}

TrainedNetwork init_network(const ArchitectureSpec& arch, uint64_t seed) {
    validate_for_inference(arch);
    TrainedNetwork net;
    net.arch = arch;
    net.rng_seed = seed;
    net.params.resize(arch.layers.size());
    Rng rng(seed);
    auto shapes = propagate_shapes(arch);
    Shape in = arch.input_shape;
    for (size_t i = 0; i < arch.layers.size(); ++i) {
        const auto& l = arch.layers[i];
        if (const auto* c = std::get_if<Conv2DSpec>(&l)) {
            const int fan_in = c->kernel * c->kernel * in.c;
            const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
            auto& p = net.params[i];
            p.w.resize(static_cast<size_t>(c->kernel) * c->kernel * in.c * c->out_channels);
            p.b.assign(static_cast<size_t>(c->out_channels), 0.0);
            for (auto& v : p.w) v = rng.uniform(-s, s);
        } else if (const auto* f = std::get_if<FullyConnectedSpec>(&l)) {
            const double s = 1.0 / std::sqrt(static_cast<double>(f->in_features));
            auto& p = net.params[i];
            p.w.resize(static_cast<size_t>(f->in_features) * f->out_features);
            p.b.assign(static_cast<size_t>(f->out_features), 0.0);
            for (auto& v : p.w) v = rng.uniform(-s, s);
        }
        in = shapes[i];
    }
    return net;
}

ForwardTrace forward_cached(const TrainedNetwork& net, const Tensor& input, Backend backend) {
    if (!(input.shape == net.arch.input_shape))
        throw ValidationError(0, "input shape mismatch at layer 0");
    auto shapes = propagate_shapes(net.arch);

    ForwardTrace trace;
    trace.activations.reserve(net.arch.layers.size() + 2);
    trace.pool_argmax.resize(net.arch.layers.size());
    trace.activations.push_back(input);

    Shape in_shape = net.arch.input_shape;
    for (size_t i = 0; i < net.arch.layers.size(); ++i) {
        const auto& l = net.arch.layers[i];
        const Shape out_shape = shapes[i];
        Tensor out(out_shape);
        const double* in_ptr = trace.activations.back().data.data();
        if (const auto* c = std::get_if<Conv2DSpec>(&l)) {
            const ConvGeom g = make_conv_geom(in_shape, *c);
            const auto& p = net.params[i];
            if (backend == Backend::OpenMP)
                kernels::omp::conv2d_forward(g, in_ptr, p.w.data(), p.b.data(), out.data.data());
            else
                kernels::serial::conv2d_forward(g, in_ptr, p.w.data(), p.b.data(), out.data.data());
        } else if (const auto* mp = std::get_if<MaxPoolSpec>(&l)) {
            trace.pool_argmax[i].resize(static_cast<size_t>(out_shape.size()));
            kernels::maxpool_forward(in_shape, *mp, in_ptr, out.data.data(),
                                     trace.pool_argmax[i].data(), out_shape);
        } else if (const auto* f = std::get_if<FullyConnectedSpec>(&l)) {
            const auto& p = net.params[i];
            if (backend == Backend::OpenMP)
                kernels::omp::fc_forward(f->in_features, f->out_features, in_ptr, p.w.data(),
                                         p.b.data(), out.data.data());
            else
                kernels::serial::fc_forward(f->in_features, f->out_features, in_ptr, p.w.data(),
                                            p.b.data(), out.data.data());
        } else if (std::holds_alternative<GlobalAvgPoolSpec>(l)) {
            kernels::gap_forward(in_shape, in_ptr, out.data.data());
        } else if (std::holds_alternative<FlattenSpec>(l)) {
            out.data = trace.activations.back().data;
        } else {
            const auto& a = std::get<ActivationSpec>(l);
            if (a.kind == ActKind::Relu)
                kernels::relu_forward(in_shape.size(), in_ptr, out.data.data());
            else
                kernels::softmax(in_shape.size(), in_ptr, out.data.data());
        }
        trace.activations.push_back(std::move(out));
        in_shape = out_shape;
    }

    if (net.arch.layers.empty() || !is_softmax(net.arch.layers.back())) {
        const Tensor& logits = trace.activations.back();
        Tensor post(logits.shape);
        kernels::softmax(logits.shape.size(), logits.data.data(), post.data.data());
        trace.activations.push_back(std::move(post));
        trace.implicit_softmax = true;
    }
    return trace;
}

std::vector<double> forward(const TrainedNetwork& net, const Tensor& input, Backend backend) {
    return forward_cached(net, input, backend).posterior();
}

void GradBuffer::zero() {
    for (auto& l : layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

GradBuffer make_grad_buffer(const TrainedNetwork& net) {
    GradBuffer g;
    g.layers.resize(net.params.size());
    for (size_t i = 0; i < net.params.size(); ++i) {
        g.layers[i].w.assign(net.params[i].w.size(), 0.0);
        g.layers[i].b.assign(net.params[i].b.size(), 0.0);
    }
    return g;
}

void backward(const TrainedNetwork& net, const ForwardTrace& trace,
              const std::vector<double>& grad_posterior, GradBuffer& grads, Backend backend) {
    auto shapes = propagate_shapes(net.arch);
    const size_t n_layers = net.arch.layers.size();

    std::vector<double> grad = grad_posterior;
    if (trace.implicit_softmax) {
        const auto& p = trace.activations.back().data;
        std::vector<double> gz(p.size());
        kernels::softmax_backward(static_cast<int64_t>(p.size()), p.data(), grad.data(), gz.data());
        grad = std::move(gz);
    }

    for (size_t ri = n_layers; ri-- > 0;) {
        const auto& l = net.arch.layers[ri];
        const Shape in_shape = ri == 0 ? net.arch.input_shape : shapes[ri - 1];
        const Tensor& layer_in = trace.activations[ri];
        std::vector<double> grad_in(static_cast<size_t>(in_shape.size()), 0.0);

        if (const auto* c = std::get_if<Conv2DSpec>(&l)) {
            const ConvGeom g = make_conv_geom(in_shape, *c);
            auto& gp = grads.layers[ri];
            if (backend == Backend::OpenMP) {
                kernels::omp::conv2d_backward_params(g, layer_in.data.data(), grad.data(),
                                                     gp.w.data(), gp.b.data());
                kernels::omp::conv2d_backward_input(g, grad.data(), net.params[ri].w.data(),
                                                    grad_in.data());
            } else {
                kernels::serial::conv2d_backward_params(g, layer_in.data.data(), grad.data(),
                                                        gp.w.data(), gp.b.data());
                kernels::serial::conv2d_backward_input(g, grad.data(), net.params[ri].w.data(),
                                                       grad_in.data());
            }
        } else if (std::holds_alternative<MaxPoolSpec>(l)) {
            kernels::maxpool_backward(in_shape, grad.data(), trace.pool_argmax[ri].data(),
                                      static_cast<int64_t>(grad.size()), grad_in.data());
        } else if (const auto* f = std::get_if<FullyConnectedSpec>(&l)) {
            auto& gp = grads.layers[ri];
            if (backend == Backend::OpenMP) {
                kernels::omp::fc_backward_params(f->in_features, f->out_features,
                                                 layer_in.data.data(), grad.data(), gp.w.data(),
                                                 gp.b.data());
                kernels::omp::fc_backward_input(f->in_features, f->out_features, grad.data(),
                                                net.params[ri].w.data(), grad_in.data());
            } else {
                kernels::serial::fc_backward_params(f->in_features, f->out_features,
                                                    layer_in.data.data(), grad.data(), gp.w.data(),
                                                    gp.b.data());
                kernels::serial::fc_backward_input(f->in_features, f->out_features, grad.data(),
                                                   net.params[ri].w.data(), grad_in.data());
            }
        } else if (std::holds_alternative<GlobalAvgPoolSpec>(l)) {
            kernels::gap_backward(in_shape, grad.data(), grad_in.data());
        } else if (std::holds_alternative<FlattenSpec>(l)) {
            grad_in = grad;
        } else {
            const auto& a = std::get<ActivationSpec>(l);
            if (a.kind == ActKind::Relu) {
                kernels::relu_backward(in_shape.size(), layer_in.data.data(), grad.data(),
                                       grad_in.data());
            } else {
                const auto& p = trace.activations[ri + 1].data;
                kernels::softmax_backward(static_cast<int64_t>(p.size()), p.data(), grad.data(),
                                          grad_in.data());
            }
        }
        grad = std::move(grad_in);
    }
}

// Model file: one header line "NNSTEAL1 <json_bytes> <blob_bytes>\n",
// then the JSON header, then the raw little-endian f64 weight blob.
void save_network(const TrainedNetwork& net, const std::filesystem::path& path) {
    nlohmann::json header;
    header["arch"] = arch_to_json(net.arch);
    header["rng_seed"] = net.rng_seed;
    nlohmann::json sizes = nlohmann::json::array();
    std::vector<double> blob;
    for (const auto& p : net.params) {
        sizes.push_back({p.w.size(), p.b.size()});
        blob.insert(blob.end(), p.w.begin(), p.w.end());
        blob.insert(blob.end(), p.b.begin(), p.b.end());
    }
    header["param_sizes"] = sizes;
    const std::string hs = header.dump();
    const uint64_t blob_bytes = blob.size() * sizeof(double);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "NNSTEAL1 " << hs.size() << " " << blob_bytes << "\n";
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob_bytes));
    if (!out) throw IoError("short write to " + path.string());
}

TrainedNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    uint64_t json_bytes = 0, blob_bytes = 0;
    in >> magic >> json_bytes >> blob_bytes;
    in.get();  // newline
    if (magic != "NNSTEAL1") throw IoError(path.string() + ": bad magic '" + magic + "'");
    std::string hs(json_bytes, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(json_bytes));
    std::vector<double> blob(blob_bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob_bytes));
    if (!in) throw IoError(path.string() + ": truncated model file");

    auto header = nlohmann::json::parse(hs);
    TrainedNetwork net;
    net.arch = arch_from_json(header.at("arch"));
    net.rng_seed = header.at("rng_seed").get<uint64_t>();
    size_t off = 0;
    for (const auto& s : header.at("param_sizes")) {
        LayerParams p;
        const size_t nw = s.at(0).get<size_t>(), nb = s.at(1).get<size_t>();
        p.w.assign(blob.begin() + off, blob.begin() + off + nw);
        off += nw;
        p.b.assign(blob.begin() + off, blob.begin() + off + nb);
        off += nb;
        net.params.push_back(std::move(p));
    }
    if (off != blob.size()) throw IoError(path.string() + ": weight blob size mismatch");
    return net;
}

}  // namespace nnsteal::nn
