#include "nnsteal/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "nnsteal/rng.hpp"

namespace nnsteal::attack {

namespace {

std::vector<Tensor> blob_templates(const BlobConfig& cfg, Rng& rng) {
    std::vector<Tensor> templates;
    templates.reserve(static_cast<size_t>(cfg.num_classes));
    for (int c = 0; c < cfg.num_classes; ++c) {
        Tensor t(cfg.input_shape);
        for (auto& v : t.data) v = rng.uniform();
        templates.push_back(std::move(t));
    }
    return templates;
}

Tensor blob_sample(const Tensor& tmpl, double noise, Rng& rng) {
    Tensor x(tmpl.shape);
    for (size_t i = 0; i < x.data.size(); ++i)
        x.data[i] = std::clamp(tmpl.data[i] + noise * rng.normal(), 0.0, 1.0);
    return x;
}

std::vector<uint8_t> read_all_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

uint32_t read_be32(const std::vector<uint8_t>& b, size_t off) {
    return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) | (uint32_t(b[off + 2]) << 8) |
           uint32_t(b[off + 3]);
}

}  // namespace

nn::LabeledDataset load_synthetic_blobs(const BlobConfig& cfg) {
    if (cfg.num_classes < 2) throw std::invalid_argument("blobs: need >= 2 classes");
    nn::LabeledDataset ds;
    ds.input_shape = cfg.input_shape;
    ds.num_classes = cfg.num_classes;

    Rng rng(cfg.seed);
    auto templates = blob_templates(cfg, rng);

    auto emit = [&](int count, nn::Split split) {
        for (int i = 0; i < count; ++i) {
            const int label = i % cfg.num_classes;  // class-balanced
            ds.inputs.push_back(blob_sample(templates[static_cast<size_t>(label)], cfg.noise, rng));
            ds.hard_labels.push_back(label);
            ds.split.push_back(split);
        }
    };
    emit(cfg.n_train, nn::Split::Train);
    emit(cfg.n_val, nn::Split::Val);
    emit(cfg.n_test, nn::Split::Test);
    ds.validate();
    return ds;
}

std::vector<Tensor> sample_blob_pool(const BlobConfig& cfg, int n, uint64_t seed) {
    // templates are regenerated from cfg.seed so the pool follows the same
    // underlying distribution as the labeled data
    Rng tmpl_rng(cfg.seed);
    auto templates = blob_templates(cfg, tmpl_rng);
    Rng rng(seed);
    std::vector<Tensor> pool;
    pool.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(cfg.num_classes)));
        pool.push_back(blob_sample(templates[static_cast<size_t>(label)], cfg.noise, rng));
    }
    return pool;
}

nn::LabeledDataset load_cifar10_binary(const std::filesystem::path& path, nn::Split split) {
    constexpr int64_t kRecord = 3073;
    constexpr int kPixels = 1024;
    auto bytes = read_all_bytes(path);
    if (bytes.empty()) throw FormatError(path.string() + ": empty file", 0);
    if (static_cast<int64_t>(bytes.size()) % kRecord != 0)
        throw FormatError(path.string() + ": size is not a multiple of 3073",
                          static_cast<int64_t>(bytes.size()) -
                              static_cast<int64_t>(bytes.size()) % kRecord);

    const int64_t n = static_cast<int64_t>(bytes.size()) / kRecord;
    nn::LabeledDataset ds;
    ds.input_shape = Shape{32, 32, 3};
    ds.num_classes = 10;
    for (int64_t r = 0; r < n; ++r) {
        const int64_t base = r * kRecord;
        const uint8_t label = bytes[static_cast<size_t>(base)];
        if (label > 9)
            throw FormatError(path.string() + ": label byte out of range", base);
        Tensor img(ds.input_shape);
        // stored channel-major (R plane, G plane, B plane), row-major per plane
        for (int c = 0; c < 3; ++c)
            for (int p = 0; p < kPixels; ++p) {
                const uint8_t v = bytes[static_cast<size_t>(base + 1 + c * kPixels + p)];
                img.data[static_cast<size_t>(p) * 3 + static_cast<size_t>(c)] = v / 255.0;
            }
        ds.inputs.push_back(std::move(img));
        ds.hard_labels.push_back(label);
        ds.split.push_back(split);
    }
    ds.validate();
    return ds;
}

nn::LabeledDataset load_idx(const std::filesystem::path& images,
                            const std::filesystem::path& labels, nn::Split split) {
    auto ib = read_all_bytes(images);
    if (ib.size() < 16) throw FormatError(images.string() + ": truncated IDX header",
                                          static_cast<int64_t>(ib.size()));
    if (read_be32(ib, 0) != 0x00000803u)
        throw FormatError(images.string() + ": bad IDX image magic", 0);
    const uint32_t n = read_be32(ib, 4);
    const uint32_t rows = read_be32(ib, 8);
    const uint32_t cols = read_be32(ib, 12);
    const int64_t expected = 16 + int64_t(n) * rows * cols;
    if (static_cast<int64_t>(ib.size()) != expected)
        throw FormatError(images.string() + ": image payload length mismatch",
                          std::min<int64_t>(static_cast<int64_t>(ib.size()), expected));

    auto lb = read_all_bytes(labels);
    if (lb.size() < 8) throw FormatError(labels.string() + ": truncated IDX header",
                                         static_cast<int64_t>(lb.size()));
    if (read_be32(lb, 0) != 0x00000801u)
        throw FormatError(labels.string() + ": bad IDX label magic", 0);
    const uint32_t ln = read_be32(lb, 4);
    if (ln != n) throw FormatError(labels.string() + ": label count != image count", 4);
    if (static_cast<int64_t>(lb.size()) != 8 + int64_t(ln))
        throw FormatError(labels.string() + ": label payload length mismatch",
                          static_cast<int64_t>(lb.size()));

    nn::LabeledDataset ds;
    ds.input_shape = Shape{static_cast<int>(rows), static_cast<int>(cols), 1};
    int max_label = 0;
    for (uint32_t i = 0; i < ln; ++i) max_label = std::max<int>(max_label, lb[8 + i]);
    ds.num_classes = max_label + 1;
    for (uint32_t i = 0; i < n; ++i) {
        Tensor img(ds.input_shape);
        const size_t base = 16 + static_cast<size_t>(i) * rows * cols;
        for (size_t p = 0; p < static_cast<size_t>(rows) * cols; ++p)
            img.data[p] = ib[base + p] / 255.0;  // row-major unsigned bytes
        ds.inputs.push_back(std::move(img));
        ds.hard_labels.push_back(lb[8 + i]);
        ds.split.push_back(split);
    }
    ds.validate();
    return ds;
}

bool membership_test(std::span<const double> posterior, double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw std::invalid_argument("membership_test: threshold must be in (0, 1)");
    if (posterior.empty()) throw std::invalid_argument("membership_test: empty posterior");
    double sum = 0.0, best = 0.0;
    for (double p : posterior) {
        if (p < -1e-9 || !std::isfinite(p))
            throw std::invalid_argument("membership_test: malformed posterior entry");
        sum += p;
        best = std::max(best, p);
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("membership_test: posterior does not sum to 1");
    return best > threshold;
}

nn::LabeledDataset reconstruct_training_set(const nn::TrainedNetwork& target,
                                            std::span<const Tensor> candidate_pool,
                                            double threshold) {
    if (candidate_pool.empty())
        throw std::invalid_argument("reconstruct_training_set: empty candidate pool");

    const int64_t n = static_cast<int64_t>(candidate_pool.size());
    std::vector<std::vector<double>> posteriors(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i)
        posteriors[static_cast<size_t>(i)] =
            nn::forward(target, candidate_pool[static_cast<size_t>(i)], nn::Backend::Serial);

    nn::LabeledDataset ds;
    ds.input_shape = target.arch.input_shape;
    ds.num_classes = target.num_classes();
    for (int64_t i = 0; i < n; ++i) {
        if (membership_test(posteriors[static_cast<size_t>(i)], threshold)) {
            ds.inputs.push_back(candidate_pool[static_cast<size_t>(i)]);
            ds.soft_labels.push_back(std::move(posteriors[static_cast<size_t>(i)]));
            ds.split.push_back(nn::Split::Train);
        }
    }
    if (ds.inputs.empty())
        std::cerr << "warning: membership reconstruction produced an empty dataset\n";
    ds.validate();
    return ds;
}

void save_labeled_dataset(const nn::LabeledDataset& ds, const std::filesystem::path& path) {
    ds.validate();
    nlohmann::json header;
    header["input_shape"] = {ds.input_shape.h, ds.input_shape.w, ds.input_shape.c};
    header["num_classes"] = ds.num_classes;
    header["count"] = ds.inputs.size();
    header["soft"] = ds.has_soft_labels();
    if (ds.has_hard_labels()) header["hard_labels"] = ds.hard_labels;
    std::vector<int> split_tags;
    for (auto s : ds.split) split_tags.push_back(static_cast<int>(s));
    header["split"] = split_tags;

    std::vector<double> blob;
    for (const auto& t : ds.inputs) blob.insert(blob.end(), t.data.begin(), t.data.end());
    for (const auto& s : ds.soft_labels) blob.insert(blob.end(), s.begin(), s.end());

    const std::string hs = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "NNSDATA1 " << hs.size() << " " << blob.size() * sizeof(double) << "\n";
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

nn::LabeledDataset load_labeled_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string magic;
    uint64_t json_bytes = 0, blob_bytes = 0;
    in >> magic >> json_bytes >> blob_bytes;
    in.get();
    if (magic != "NNSDATA1")
        throw FormatError(path.string() + ": bad dataset magic '" + magic + "'", 0);
    std::string hs(json_bytes, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(json_bytes));
    std::vector<double> blob(blob_bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob_bytes));
    if (!in) throw FormatError(path.string() + ": truncated dataset file",
                               static_cast<int64_t>(json_bytes));

    auto header = nlohmann::json::parse(hs);
    nn::LabeledDataset ds;
    const auto& sh = header.at("input_shape");
    ds.input_shape = Shape{sh.at(0).get<int>(), sh.at(1).get<int>(), sh.at(2).get<int>()};
    ds.num_classes = header.at("num_classes").get<int>();
    const size_t n = header.at("count").get<size_t>();
    const bool soft = header.at("soft").get<bool>();
    if (header.contains("hard_labels"))
        ds.hard_labels = header.at("hard_labels").get<std::vector<int>>();
    for (int s : header.at("split").get<std::vector<int>>())
        ds.split.push_back(static_cast<nn::Split>(s));

    const size_t per_input = static_cast<size_t>(ds.input_shape.size());
    size_t off = 0;
    for (size_t i = 0; i < n; ++i) {
        Tensor t(ds.input_shape);
        std::copy(blob.begin() + static_cast<std::ptrdiff_t>(off),
                  blob.begin() + static_cast<std::ptrdiff_t>(off + per_input), t.data.begin());
        off += per_input;
        ds.inputs.push_back(std::move(t));
    }
    if (soft) {
        for (size_t i = 0; i < n; ++i) {
            std::vector<double> row(blob.begin() + static_cast<std::ptrdiff_t>(off),
                                    blob.begin() + static_cast<std::ptrdiff_t>(
                                                       off + static_cast<size_t>(ds.num_classes)));
            off += static_cast<size_t>(ds.num_classes);
            ds.soft_labels.push_back(std::move(row));
        }
    }
    if (off != blob.size())
        throw FormatError(path.string() + ": dataset blob size mismatch",
                          static_cast<int64_t>(off * sizeof(double)));
    ds.validate();
    return ds;
}

}  // namespace nnsteal::attack
