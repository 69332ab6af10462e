#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>

#include "nnsteal/datasets.hpp"
#include "nnsteal/regress.hpp"
#include "nnsteal/timing_dataset.hpp"
#include "nnsteal/train.hpp"

using namespace nnsteal;
using namespace nnsteal::attack;

TEST_CASE("sample_random_architecture: singleton space, determinism, classifier tail") {
    ArchSpace space;
    space.depth_min = space.depth_max = 5;
    space.kernel_choices = {3};
    space.filter_choices = {8};
    space.input_shape = Shape{16, 16, 3};
    space.num_classes = 4;

    auto a = sample_random_architecture(space, 1);
    auto b = sample_random_architecture(space, 1);
    auto c = sample_random_architecture(space, 2);
    CHECK(a == b);        // same seed, same arch
    CHECK(a == c);        // singleton space: every draw is the unique arch
    CHECK(nn::depth(a) == 5);
    CHECK(std::holds_alternative<nn::FullyConnectedSpec>(a.layers.back()));
    nn::validate_for_inference(a);
}

TEST_CASE("sample_random_architecture: depth frequencies pass a chi-square check") {
    ArchSpace space;
    space.depth_min = 5;
    space.depth_max = 24;
    space.input_shape = Shape{32, 32, 3};
    space.num_classes = 10;

    std::map<int, int> freq;
    const int n = 1000;
    Rng seeds(404);
    for (int i = 0; i < n; ++i) {
        auto arch = sample_random_architecture(space, seeds.next_u64());
        ++freq[nn::depth(arch)];
    }
    const int bins = 20;
    const double expected = static_cast<double>(n) / bins;
    double chi2 = 0.0;
    for (int d = 5; d <= 24; ++d) {
        const double o = static_cast<double>(freq[d]);
        chi2 += (o - expected) * (o - expected) / expected;
        // binomial 4-sigma guard per bin
        const double sigma = std::sqrt(expected * (1.0 - 1.0 / bins));
        CHECK(std::abs(o - expected) <= 4.0 * sigma);
    }
    CHECK(chi2 < 43.82);  // chi-square 99.9% quantile, 19 dof
}

TEST_CASE("build_timing_dataset: row count, reproducibility, affine depth rows") {
    ArchSpace space;
    space.depth_min = 5;
    space.depth_max = 24;
    space.input_shape = Shape{8, 8, 3};
    space.num_classes = 4;
    space.filter_choices = {4, 8};

    timing::CostModel cm;
    cm.alpha = 1e-9;
    cm.beta = 1e-5;
    cm.noise_sigma = 0.05;
    cm.seed = 3;

    auto ds = build_timing_dataset(space, 100, cm, 20, 1);
    CHECK(ds.samples.size() == 100);
    CHECK(ds.mode == TimingMode::CostModel);
    for (const auto& s : ds.samples) {
        CHECK(s.mean_time_s > 0.0);
        CHECK(s.depth >= 5);
        CHECK(s.depth <= 24);
        CHECK(s.n_runs == 20);
        CHECK(s.hardware_tag == "cm:cm-default");
    }

    auto again = build_timing_dataset(space, 100, cm, 20, 1);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(ds.samples[i].mean_time_s == again.samples[i].mean_time_s);
        CHECK(ds.samples[i].depth == again.samples[i].depth);
    }

    auto single = build_timing_dataset(space, 1, cm, 20, 5);
    CHECK(single.samples.size() == 1);

    // sigma = 0 fixed-width sweep: time is affine in depth (zero residual
    // against the line through the first two depths)
    timing::CostModel exact = cm;
    exact.noise_sigma = 0.0;
    auto sweep = build_depth_sweep_dataset(5, 24, 1, 16, 3, Shape{8, 8, 3}, 4, exact, 4);
    REQUIRE(sweep.samples.size() == 20);
    const double t0 = sweep.samples[0].mean_time_s;
    const double slope = sweep.samples[1].mean_time_s - t0;
    for (size_t i = 0; i < sweep.samples.size(); ++i) {
        const double fit = t0 + slope * static_cast<double>(i);
        CHECK(std::abs(sweep.samples[i].mean_time_s - fit) <= 1e-9 * fit);
    }
}

TEST_CASE("poison_timing_dataset: fractions, label flips, ridge degradation") {
    ArchSpace space;
    space.input_shape = Shape{8, 8, 3};
    space.num_classes = 4;
    space.filter_choices = {4, 8};
    timing::CostModel cm;
    cm.alpha = 1e-9;
    cm.beta = 1e-5;
    cm.noise_sigma = 0.0;
    auto ds = build_timing_dataset(space, 60, cm, 4, 9);

    auto unchanged = poison_timing_dataset(ds, 0.0, PoisonStrategy::LabelFlip, 1);
    for (size_t i = 0; i < ds.samples.size(); ++i)
        CHECK(unchanged.samples[i].depth == ds.samples[i].depth);

    auto flipped = poison_timing_dataset(ds, 1.0, PoisonStrategy::LabelFlip, 1);
    CHECK(flipped.samples.size() == ds.samples.size());
    for (size_t i = 0; i < ds.samples.size(); ++i)
        CHECK(flipped.samples[i].depth != ds.samples[i].depth);
    // the input dataset is untouched
    for (size_t i = 0; i < ds.samples.size(); ++i) CHECK(ds.samples[i].depth >= 1);

    // 30% flips strictly hurt a ridge fit on clean affine data
    auto sweep = build_depth_sweep_dataset(5, 24, 2, 16, 3, Shape{8, 8, 3}, 4, cm, 4);
    auto [train, hold] = regress::split_dataset(sweep, 0.25, 7);
    auto poisoned = poison_timing_dataset(train, 0.3, PoisonStrategy::LabelFlip, 2);
    auto clean_fit = regress::Regressor::fit(regress::RegressorKind::Ridge, train,
                                             regress::FeatureSet::TimeOnly, {}, 1);
    auto poisoned_fit = regress::Regressor::fit(regress::RegressorKind::Ridge, poisoned,
                                                regress::FeatureSet::TimeOnly, {}, 1);
    CHECK(regress::score(poisoned_fit, hold).mse > regress::score(clean_fit, hold).mse);
}

TEST_CASE("timing CSV: exact header and lossless round-trip") {
    ArchSpace space;
    space.input_shape = Shape{8, 8, 3};
    space.num_classes = 4;
    space.filter_choices = {4, 8};
    timing::CostModel cm;
    cm.noise_sigma = 0.03;
    auto ds = build_timing_dataset(space, 25, cm, 3, 11);

    const auto path = std::filesystem::temp_directory_path() / "nnsteal_timing_test.csv";
    write_timing_csv(ds, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "arch_id,depth,n_params,mean_time_s,n_runs,hardware_tag");
    in.close();

    auto loaded = read_timing_csv(path);
    REQUIRE(loaded.samples.size() == ds.samples.size());
    CHECK(loaded.mode == TimingMode::CostModel);
    CHECK(loaded.cost_model_id == "cm-default");
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(loaded.samples[i].arch_id == ds.samples[i].arch_id);
        CHECK(loaded.samples[i].depth == ds.samples[i].depth);
        CHECK(loaded.samples[i].n_params == ds.samples[i].n_params);
        CHECK(loaded.samples[i].mean_time_s == ds.samples[i].mean_time_s);  // bit-exact
        CHECK(loaded.samples[i].n_runs == ds.samples[i].n_runs);
        CHECK(loaded.samples[i].hardware_tag == ds.samples[i].hardware_tag);
    }
    std::filesystem::remove(path);
}

TEST_CASE("membership_test: threshold rule") {
    CHECK(membership_test(std::vector<double>{0.95, 0.02, 0.03}, 0.9));
    CHECK_FALSE(membership_test(std::vector<double>{0.4, 0.3, 0.3}, 0.9));
    // uniform posterior never passes a threshold >= 1/C
    CHECK_FALSE(membership_test(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.25));
    CHECK_FALSE(membership_test(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 0.9));
    CHECK_THROWS(membership_test(std::vector<double>{0.9, 0.9}, 0.5));  // not a distribution
    CHECK_THROWS(membership_test(std::vector<double>{1.0}, 1.0));       // threshold out of range
}

TEST_CASE("reconstruct_training_set: recall on an overfit target, soft labels") {
    BlobConfig cfg;
    cfg.input_shape = Shape{6, 6, 2};
    cfg.num_classes = 3;
    cfg.n_train = 90;
    cfg.n_test = 0;
    cfg.noise = 0.08;
    cfg.seed = 21;
    auto data = load_synthetic_blobs(cfg);

    auto arch = fixed_width_arch(1, 6, 3, cfg.input_shape, cfg.num_classes);
    nn::TrainOptions opt;
    opt.epochs = 60;
    opt.lr = 0.3;
    opt.batch_size = 8;
    opt.seed = 2;
    auto target = nn::train_supervised(arch, data, opt).net;
    REQUIRE(nn::evaluate(target, data, nn::Split::Train) >= 0.95);

    // pool = the target's own train split; membership recall >= 0.8
    auto recon = reconstruct_training_set(target, data.inputs, 0.9);
    CHECK(static_cast<double>(recon.size()) >= 0.8 * static_cast<double>(data.inputs.size()));
    CHECK(recon.size() <= data.inputs.size());  // subset of the pool
    for (const auto& soft : recon.soft_labels) {
        double sum = 0.0;
        for (double v : soft) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-6);
    }

    // threshold -> 1 gives the empty set
    auto none = reconstruct_training_set(target, data.inputs, 0.999999999);
    CHECK(none.size() == 0);
}

TEST_CASE("labeled dataset files round-trip") {
    BlobConfig cfg;
    cfg.input_shape = Shape{4, 4, 1};
    cfg.num_classes = 2;
    cfg.n_train = 12;
    cfg.n_test = 4;
    cfg.seed = 5;
    auto ds = load_synthetic_blobs(cfg);
    const auto path = std::filesystem::temp_directory_path() / "nnsteal_ds_test.nnd";
    save_labeled_dataset(ds, path);
    auto loaded = load_labeled_dataset(path);
    CHECK(loaded.size() == ds.size());
    CHECK(loaded.hard_labels == ds.hard_labels);
    for (size_t i = 0; i < ds.size(); ++i) CHECK(loaded.inputs[i].data == ds.inputs[i].data);
    std::filesystem::remove(path);
}

TEST_CASE("synthetic blobs: deterministic, balanced, in range") {
    BlobConfig cfg;
    cfg.input_shape = Shape{4, 4, 3};
    cfg.num_classes = 4;
    cfg.n_train = 512;
    cfg.n_test = 0;
    cfg.seed = 7;
    auto a = load_synthetic_blobs(cfg);
    auto b = load_synthetic_blobs(cfg);
    REQUIRE(a.size() == 512);
    std::map<int, int> counts;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.inputs[i].data == b.inputs[i].data);  // deterministic
        ++counts[a.hard_labels[i]];
        for (double v : a.inputs[i].data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    for (int c = 0; c < 4; ++c) CHECK(counts[c] == 128);  // class-balanced
}

TEST_CASE("CIFAR-10 binary format") {
    const auto path = std::filesystem::temp_directory_path() / "nnsteal_cifar_test.bin";
    {
        // three records built by hand
        std::ofstream out(path, std::ios::binary);
        for (int r = 0; r < 3; ++r) {
            const uint8_t label = static_cast<uint8_t>(r * 3);
            out.put(static_cast<char>(label));
            for (int i = 0; i < 3072; ++i)
                out.put(static_cast<char>((r + i) % 256));
        }
    }
    auto ds = load_cifar10_binary(path, nn::Split::Train);
    REQUIRE(ds.size() == 3);
    CHECK(ds.input_shape == Shape{32, 32, 3});
    CHECK(ds.hard_labels == std::vector<int>{0, 3, 6});
    // first pixel of record 1: red plane byte (1+0) = 1 -> 1/255
    CHECK(ds.inputs[1].at(0, 0, 0) == doctest::Approx(1.0 / 255));
    // first green byte of record 1 is (1+1024) % 256 = 1
    CHECK(ds.inputs[1].at(0, 0, 1) == doctest::Approx(1.0 / 255));

    // truncated file is rejected with a byte offset in the message
    {
        std::ofstream out(path, std::ios::binary);
        for (int i = 0; i < 3073 + 100; ++i) out.put(char(0));
    }
    CHECK_THROWS_AS(load_cifar10_binary(path, nn::Split::Train), FormatError);

    // bad label byte
    {
        std::ofstream out(path, std::ios::binary);
        out.put(char(11));
        for (int i = 0; i < 3072; ++i) out.put(char(0));
    }
    CHECK_THROWS_AS(load_cifar10_binary(path, nn::Split::Train), FormatError);
    std::filesystem::remove(path);
}

TEST_CASE("IDX format against a hand-built 3-image fixture") {
    const auto img_path = std::filesystem::temp_directory_path() / "nnsteal_idx_img";
    const auto lbl_path = std::filesystem::temp_directory_path() / "nnsteal_idx_lbl";
    auto be32 = [](std::ofstream& out, uint32_t v) {
        out.put(static_cast<char>(v >> 24));
        out.put(static_cast<char>(v >> 16));
        out.put(static_cast<char>(v >> 8));
        out.put(static_cast<char>(v));
    };
    {
        std::ofstream out(img_path, std::ios::binary);
        be32(out, 0x00000803u);
        be32(out, 3);
        be32(out, 2);
        be32(out, 2);
        for (int i = 0; i < 12; ++i) out.put(static_cast<char>(i * 10));
    }
    {
        std::ofstream out(lbl_path, std::ios::binary);
        be32(out, 0x00000801u);
        be32(out, 3);
        out.put(char(0));
        out.put(char(1));
        out.put(char(1));
    }
    auto ds = load_idx(img_path, lbl_path, nn::Split::Test);
    REQUIRE(ds.size() == 3);
    CHECK(ds.input_shape == Shape{2, 2, 1});
    CHECK(ds.hard_labels == std::vector<int>{0, 1, 1});
    // row-major unsigned bytes: image 1 starts at byte 4 -> value 40
    CHECK(ds.inputs[1].at(0, 0, 0) == doctest::Approx(40.0 / 255));
    CHECK(ds.inputs[1].at(0, 1, 0) == doctest::Approx(50.0 / 255));
    CHECK(ds.inputs[1].at(1, 0, 0) == doctest::Approx(60.0 / 255));

    // wrong magic is rejected
    {
        std::ofstream out(img_path, std::ios::binary);
        be32(out, 0x00000802u);
        be32(out, 3);
        be32(out, 2);
        be32(out, 2);
        for (int i = 0; i < 12; ++i) out.put(char(0));
    }
    CHECK_THROWS_AS(load_idx(img_path, lbl_path, nn::Split::Test), FormatError);
    std::filesystem::remove(img_path);
    std::filesystem::remove(lbl_path);
}
