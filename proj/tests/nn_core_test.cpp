#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "nnsteal/archspace.hpp"
#include "nnsteal/network.hpp"
#include "nnsteal/train.hpp"
#include "oracles.hpp"

using namespace nnsteal;
using namespace nnsteal::nn;

namespace {

ArchitectureSpec fc_only_arch(int in_features, int classes) {
    ArchitectureSpec arch;
    arch.input_shape = Shape{1, 1, in_features};
    arch.num_classes = classes;
    arch.layers.emplace_back(FullyConnectedSpec{in_features, classes});
    return arch;
}

Tensor constant_tensor(Shape s, double v) {
    Tensor t(s);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
}

Tensor random_tensor(Shape s, Rng& rng) {
    Tensor t(s);
    for (auto& v : t.data) v = rng.uniform();
    return t;
}

// two well-separated constant-template classes
LabeledDataset separable_blobs(int n_per_class, int features, double noise, uint64_t seed) {
    LabeledDataset ds;
    ds.input_shape = Shape{1, 1, features};
    ds.num_classes = 2;
    Rng rng(seed);
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const int label = i % 2;
        Tensor x(ds.input_shape);
        for (auto& v : x.data)
            v = std::clamp((label == 0 ? 0.2 : 0.8) + noise * rng.normal(), 0.0, 1.0);
        ds.inputs.push_back(std::move(x));
        ds.hard_labels.push_back(label);
        ds.split.push_back(Split::Train);
    }
    return ds;
}

}  // namespace

TEST_CASE("forward: zero-weight network yields the uniform posterior") {
    auto arch = fc_only_arch(8, 4);
    auto net = init_network(arch, 1);
    for (auto& v : net.params[0].w) v = 0.0;
    Rng rng(3);
    auto input = random_tensor(arch.input_shape, rng);
    auto p = forward(net, input);
    REQUIRE(p.size() == 4);
    for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward: identity 1x1 conv then GAP on constant input is uniform") {
    ArchitectureSpec arch;
    arch.input_shape = Shape{4, 4, 3};
    arch.num_classes = 3;
    arch.layers.emplace_back(Conv2DSpec{3, 1, 1, Padding::Same});
    arch.layers.emplace_back(GlobalAvgPoolSpec{});
    auto net = init_network(arch, 1);
    auto& p0 = net.params[0];
    std::fill(p0.w.begin(), p0.w.end(), 0.0);
    for (int i = 0; i < 3; ++i) p0.w[static_cast<size_t>(i) * 3 + i] = 1.0;

    auto p = forward(net, constant_tensor(arch.input_shape, 0.7));
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("forward: fixed seed and input reproduce the posterior bitwise") {
    auto arch = attack::fixed_width_arch(3, 6, 3, Shape{6, 6, 3}, 4);
    auto net = init_network(arch, 42);
    Rng rng(9);
    auto input = random_tensor(arch.input_shape, rng);
    auto a = forward(net, input);
    auto b = forward(net, input);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("forward: posterior sums to 1 for random architectures") {
    attack::ArchSpace space;
    space.input_shape = Shape{8, 8, 3};
    space.num_classes = 5;
    space.depth_min = 1;
    space.depth_max = 6;
    space.filter_choices = {2, 4};
    for (uint64_t seed = 0; seed < 12; ++seed) {
        auto arch = attack::sample_random_architecture(space, seed);
        auto net = init_network(arch, seed);
        Rng rng(seed + 100);
        auto p = forward(net, random_tensor(arch.input_shape, rng));
        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-6);
        for (double v : p) CHECK(v >= 0.0);
    }
}

TEST_CASE("forward: shape mismatch is rejected with the failing layer index") {
    auto arch = fc_only_arch(8, 4);
    auto net = init_network(arch, 1);
    Tensor wrong(Shape{1, 1, 9});
    CHECK_THROWS_AS(forward(net, wrong), ValidationError);

    // an inconsistent inner layer reports its own index
    ArchitectureSpec bad;
    bad.input_shape = Shape{8, 8, 3};
    bad.num_classes = 4;
    bad.layers.emplace_back(Conv2DSpec{4, 3, 1, Padding::Same});
    bad.layers.emplace_back(FullyConnectedSpec{10, 4});  // 8*8*4 != 10
    try {
        validate_for_inference(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.layer_index() == 1);
    }
}

TEST_CASE("multiplication_count matches the closed forms") {
    auto fc = fc_only_arch(128, 10);
    CHECK(multiplication_count(fc) == 1280);

    ArchitectureSpec conv;
    conv.input_shape = Shape{32, 32, 3};
    conv.num_classes = 10;
    conv.layers.emplace_back(Conv2DSpec{32, 3, 1, Padding::Same});
    CHECK(multiplication_count(conv) == 884736);  // 32*32*32*3*3*3

    ArchitectureSpec empty;
    empty.input_shape = Shape{4, 4, 1};
    CHECK(multiplication_count(empty) == 0);
}

TEST_CASE("multiplication_count equals the instrumented naive forward") {
    attack::ArchSpace space;
    space.input_shape = Shape{8, 8, 3};
    space.num_classes = 4;
    space.depth_min = 1;
    space.depth_max = 7;
    space.filter_choices = {2, 3, 5};
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto arch = attack::sample_random_architecture(space, seed);
        auto net = init_network(arch, seed);
        Rng rng(seed);
        auto input = random_tensor(arch.input_shape, rng);
        const auto counts = oracle::instrumented_forward(net, input);
        const auto model = op_counts(arch);
        CHECK(model.multiplications == counts.multiplications);
        CHECK(model.comparisons == counts.comparisons);
    }
}

TEST_CASE("param_count matches enumeration") {
    ArchitectureSpec conv;
    conv.input_shape = Shape{32, 32, 3};
    conv.num_classes = 10;
    conv.layers.emplace_back(Conv2DSpec{32, 3, 1, Padding::Same});
    CHECK(param_count(conv) == 896);  // 3*3*3*32 + 32

    auto fc = fc_only_arch(2048, 10);
    CHECK(param_count(fc) == 20490);

    ArchitectureSpec pool_only;
    pool_only.input_shape = Shape{8, 8, 2};
    pool_only.layers.emplace_back(MaxPoolSpec{2, 2});
    pool_only.layers.emplace_back(MaxPoolSpec{2, 2});
    CHECK(param_count(pool_only) == 0);

    attack::ArchSpace space;
    space.input_shape = Shape{16, 16, 3};
    space.num_classes = 7;
    space.depth_min = 2;
    space.depth_max = 9;
    for (uint64_t seed = 0; seed < 8; ++seed) {
        auto arch = attack::sample_random_architecture(space, seed);
        CHECK(param_count(arch) == oracle::enumerate_params(arch));
    }
}

TEST_CASE("depth counts conv and pool layers; classifier head is not counted") {
    CHECK(depth(ArchitectureSpec{Shape{4, 4, 1}, {}, 2}) == 0);
    // the three evaluation targets reproduce the 9 / 11 / 13 depth labels
    CHECK(depth(attack::vgg_style_target(1, Shape{32, 32, 3}, 10)) == 9);
    CHECK(depth(attack::vgg_style_target(2, Shape{32, 32, 3}, 10)) == 11);
    CHECK(depth(attack::vgg_style_target(3, Shape{32, 32, 3}, 10)) == 13);
}

TEST_CASE("train_supervised: separable blobs reach 0.95 train accuracy") {
    auto ds = separable_blobs(40, 4, 0.05, 11);
    auto arch = fc_only_arch(4, 2);
    TrainOptions opt;
    opt.epochs = 20;
    opt.lr = 0.5;
    opt.batch_size = 8;
    opt.seed = 5;
    auto result = train_supervised(arch, ds, opt);
    CHECK(evaluate(result.net, ds, Split::Train) >= 0.95);
    CHECK(result.epoch_loss.back() <= result.epoch_loss.front());
}

TEST_CASE("train_supervised: lr = 0 leaves parameters unchanged") {
    auto ds = separable_blobs(10, 4, 0.05, 11);
    auto arch = fc_only_arch(4, 2);
    TrainOptions opt;
    opt.epochs = 3;
    opt.lr = 0.0;
    opt.seed = 5;
    auto result = train_supervised(arch, ds, opt);
    auto fresh = init_network(arch, opt.seed);
    CHECK(result.net.params[0].w == fresh.params[0].w);
    CHECK(result.net.params[0].b == fresh.params[0].b);
}

TEST_CASE("train_supervised: same seed reproduces parameters exactly") {
    auto ds = separable_blobs(20, 4, 0.1, 3);
    auto arch = fc_only_arch(4, 2);
    TrainOptions opt;
    opt.epochs = 8;
    opt.lr = 0.2;
    opt.batch_size = 4;
    opt.seed = 77;
    auto a = train_supervised(arch, ds, opt);
    auto b = train_supervised(arch, ds, opt);
    CHECK(a.net.params[0].w == b.net.params[0].w);
    CHECK(a.net.params[0].b == b.net.params[0].b);

    CHECK_THROWS(train_supervised(arch, LabeledDataset{ds.input_shape, 2}, opt));
}

TEST_CASE("distillation loss arithmetic") {
    // direct evaluation of the squared-error form
    const std::vector<double> target{0.7, 0.3}, out{0.6, 0.4};
    double loss = 0.0;
    for (size_t i = 0; i < 2; ++i) loss += (target[i] - out[i]) * (target[i] - out[i]);
    CHECK(loss == doctest::Approx(0.02).epsilon(1e-12));

    // identical posteriors: zero loss through the library path
    auto arch = fc_only_arch(4, 2);
    auto net = init_network(arch, 1);
    Rng rng(2);
    std::vector<Tensor> inputs{random_tensor(arch.input_shape, rng)};
    std::vector<std::vector<double>> targets{forward(net, inputs[0])};
    CHECK(distillation_loss(net, inputs, targets) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("train_distilled: substitute mimics a 1-layer target") {
    auto arch = fc_only_arch(6, 3);
    auto target = init_network(arch, 123);
    Rng rng(5);
    std::vector<Tensor> inputs;
    std::vector<std::vector<double>> posteriors;
    for (int i = 0; i < 200; ++i) {
        inputs.push_back(random_tensor(arch.input_shape, rng));
        posteriors.push_back(forward(target, inputs.back()));
    }
    TrainOptions opt;
    opt.epochs = 60;
    opt.lr = 0.5;
    opt.batch_size = 8;
    opt.seed = 6;
    auto result = train_distilled(arch, inputs, posteriors, opt);
    CHECK(result.epoch_loss.back() <= result.epoch_loss.front());
    CHECK(agreement(result.net, target, inputs) >= 0.9);

    // posterior length mismatch is rejected
    std::vector<std::vector<double>> bad{{0.5, 0.5}};
    std::vector<Tensor> one{inputs[0]};
    CHECK_THROWS(train_distilled(arch, one, bad, opt));
}

TEST_CASE("evaluate: fixed predictions and balanced classes") {
    auto arch = fc_only_arch(4, 4);
    auto net = init_network(arch, 1);
    for (auto& v : net.params[0].w) v = 0.0;
    net.params[0].b = {1.0, 0.0, 0.0, 0.0};  // always predicts class 0

    LabeledDataset ds;
    ds.input_shape = arch.input_shape;
    ds.num_classes = 4;
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        ds.inputs.push_back(random_tensor(ds.input_shape, rng));
        ds.hard_labels.push_back(i % 4);
        ds.split.push_back(Split::Test);
    }
    CHECK(evaluate(net, ds, Split::Test) == doctest::Approx(0.25));
    CHECK_THROWS(evaluate(net, ds, Split::Train));  // empty split
}

TEST_CASE("evaluate: random net on random labels is near chance") {
    auto arch = fc_only_arch(8, 4);
    auto net = init_network(arch, 31);
    LabeledDataset ds;
    ds.input_shape = arch.input_shape;
    ds.num_classes = 4;
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        ds.inputs.push_back(random_tensor(ds.input_shape, rng));
        ds.hard_labels.push_back(static_cast<int>(rng.uniform_int(4)));
        ds.split.push_back(Split::Test);
    }
    const double acc = evaluate(net, ds, Split::Test);
    CHECK(acc == doctest::Approx(0.25).epsilon(0.2));  // 0.25 +- 0.05
}

TEST_CASE("agreement: identity, permuted head, independent nets") {
    Rng rng(4);
    auto arch = fc_only_arch(16, 10);
    auto net = init_network(arch, 1);
    std::vector<Tensor> inputs;
    for (int i = 0; i < 1000; ++i) inputs.push_back(random_tensor(arch.input_shape, rng));

    CHECK(agreement(net, net, inputs) == doctest::Approx(1.0));

    // rotate the class mapping: argmax moves for every non-tied input
    auto permuted = net;
    for (int i = 0; i < 16; ++i)
        for (int o = 0; o < 10; ++o)
            permuted.params[0].w[static_cast<size_t>(i) * 10 + o] =
                net.params[0].w[static_cast<size_t>(i) * 10 + (o + 1) % 10];
    CHECK(agreement(net, permuted, inputs) < 1.0);

    auto other = init_network(arch, 2);
    const double a = agreement(net, other, inputs);
    CHECK(a == doctest::Approx(0.1).epsilon(0.5));  // 0.1 +- 0.05

    auto four_class = init_network(fc_only_arch(16, 4), 3);
    CHECK_THROWS(agreement(net, four_class, inputs));  // class-count mismatch
}

TEST_CASE("gradients: cross-entropy and distillation losses match finite differences") {
    ArchitectureSpec arch;
    arch.input_shape = Shape{6, 6, 3};
    arch.num_classes = 3;
    arch.layers.emplace_back(Conv2DSpec{4, 3, 1, Padding::Same});
    arch.layers.emplace_back(ActivationSpec{ActKind::Relu});
    arch.layers.emplace_back(MaxPoolSpec{2, 2});
    arch.layers.emplace_back(GlobalAvgPoolSpec{});
    arch.layers.emplace_back(FullyConnectedSpec{4, 3});

    auto net = init_network(arch, 21);
    Rng rng(22);
    auto input = random_tensor(arch.input_shape, rng);
    const int label = 1;
    const std::vector<double> soft_target{0.2, 0.5, 0.3};

    SUBCASE("cross-entropy") {
        auto ce_loss = [&] {
            auto p = forward(net, input);
            return -std::log(std::max(p[label], 1e-15));
        };
        auto trace = forward_cached(net, input);
        auto grads = make_grad_buffer(net);
        std::vector<double> gp(3, 0.0);
        gp[label] = -1.0 / std::max(trace.posterior()[label], 1e-15);
        backward(net, trace, gp, grads);
        auto res = oracle::check_gradient(net, ce_loss, grads, 25, rng);
        CHECK(res.coords_checked >= 100);
        CHECK(res.max_rel_err <= 1e-4);
    }

    SUBCASE("distillation squared error") {
        auto l2_loss = [&] {
            auto p = forward(net, input);
            double l = 0.0;
            for (size_t i = 0; i < p.size(); ++i)
                l += (p[i] - soft_target[i]) * (p[i] - soft_target[i]);
            return l;
        };
        auto trace = forward_cached(net, input);
        auto grads = make_grad_buffer(net);
        std::vector<double> gp(3);
        for (size_t i = 0; i < 3; ++i)
            gp[i] = 2.0 * (trace.posterior()[i] - soft_target[i]);
        backward(net, trace, gp, grads);
        auto res = oracle::check_gradient(net, l2_loss, grads, 25, rng);
        CHECK(res.coords_checked >= 100);
        CHECK(res.max_rel_err <= 1e-4);
    }
}

TEST_CASE("model files round-trip") {
    auto arch = attack::vgg_style_target(1, Shape{8, 8, 3}, 4);
    auto net = init_network(arch, 99);
    const auto path = std::filesystem::temp_directory_path() / "nnsteal_model_test.nns";
    save_network(net, path);
    auto loaded = load_network(path);
    CHECK(loaded.arch == net.arch);
    CHECK(loaded.rng_seed == net.rng_seed);
    REQUIRE(loaded.params.size() == net.params.size());
    for (size_t i = 0; i < net.params.size(); ++i) {
        CHECK(loaded.params[i].w == net.params[i].w);
        CHECK(loaded.params[i].b == net.params[i].b);
    }
    std::filesystem::remove(path);
}
